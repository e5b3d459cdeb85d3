/*
 * Copyright (c) 2026, choicerbm contributors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "test_support.hpp"

#include <gtest/gtest.h>

#include <algorithm>

using namespace choicerbm;
using choicerbm::testing::TempDir;
using choicerbm::testing::write_file;

namespace {

ChoiceDataset small_dataset(Index rows, std::uint64_t seed = 1) {
    Rng rng(seed);
    MatrixXd x(rows, 3);
    std::vector<int> choices(static_cast<std::size_t>(rows));
    for (Index n = 0; n < rows; ++n) {
        for (Index k = 0; k < 3; ++k) x(n, k) = 10.0 * k + detail::standard_normal(rng);
        choices[static_cast<std::size_t>(n)] = static_cast<int>(detail::uniform_index(rng, 4));
    }
    return ChoiceDataset(x, choices, 4);
}

std::vector<std::vector<double>> sorted_rows(const MatrixXd& x) {
    std::vector<std::vector<double>> rows(static_cast<std::size_t>(x.rows()));
    for (Index n = 0; n < x.rows(); ++n) {
        for (Index k = 0; k < x.cols(); ++k) rows[static_cast<std::size_t>(n)].push_back(x(n, k));
    }
    std::sort(rows.begin(), rows.end());
    return rows;
}

}  // namespace

TEST(Dataset, OneHotFromThreeRowFile) {
    TempDir dir("ds");
    write_file(dir.file("a.csv"), "choice,x\n1,0.5\n2,1.5\n1,-2\n");
    const ChoiceDataset ds = load_csv_raw(dir.file("a.csv"), "choice");
    ASSERT_EQ(ds.alternatives(), 2);
    MatrixXd expect(3, 2);
    expect << 1, 0, 0, 1, 1, 0;
    EXPECT_EQ(ds.y(), expect);
    EXPECT_EQ(ds.choices(), (std::vector<int>{0, 1, 0}));
}

TEST(Dataset, EveryRowOfYIsOneHot) {
    const ChoiceDataset ds = small_dataset(200);
    for (Index n = 0; n < ds.rows(); ++n) {
        EXPECT_EQ(ds.y().row(n).sum(), 1.0);
        EXPECT_EQ((ds.y().row(n).array() == 0.0).count(), ds.alternatives() - 1);
        EXPECT_EQ(ds.y()(n, ds.choice(n)), 1.0);
    }
}

TEST(Dataset, RejectsBadConstruction) {
    MatrixXd x = MatrixXd::Zero(2, 1);
    EXPECT_THROW(ChoiceDataset(MatrixXd(0, 1), {}, 2), DomainError);
    EXPECT_THROW(ChoiceDataset(x, {0, 1}, 1), DomainError);
    EXPECT_THROW(ChoiceDataset(x, {0}, 2), DimensionError);
    EXPECT_THROW(ChoiceDataset(x, {0, 2}, 2), DomainError);
    EXPECT_THROW(ChoiceDataset(x, {0, 1}, 2, {"a", "b"}), DimensionError);
}

TEST(Dataset, NormalizationMomentsAndConstantColumn) {
    ChoiceDataset raw = small_dataset(500);
    MatrixXd x = raw.x();
    x.col(1).setConstant(5.0);
    raw = raw.with_x(x, NormStats::identity(3));
    const ChoiceDataset ds = normalize(raw);
    const NormStats& s = ds.norm_stats();
    EXPECT_TRUE(s.constant[1]);
    EXPECT_FALSE(s.constant[0]);
    EXPECT_TRUE(ds.x().col(1).isZero(0.0));
    for (Index k : {0, 2}) {
        const double mean = ds.x().col(k).mean();
        const double sd = std::sqrt((ds.x().col(k).array() - mean).square().mean());
        EXPECT_LT(std::abs(mean), 1e-9);
        EXPECT_LT(std::abs(sd - 1.0), 1e-6);
    }
}

TEST(Dataset, DenormalizeRoundTrip) {
    const ChoiceDataset raw = small_dataset(100);
    const ChoiceDataset ds = normalize(raw);
    const MatrixXd back = denormalize(ds.x(), ds.norm_stats());
    for (Index n = 0; n < raw.rows(); ++n) {
        for (Index k = 0; k < raw.features(); ++k) {
            EXPECT_LE(std::abs(back(n, k) - raw.x()(n, k)), 1e-9 * std::max(1.0, std::abs(raw.x()(n, k))));
        }
    }
}

TEST(Dataset, SplitSizesFloor) {
    const auto [tr, va] = split(small_dataset(10), SplitSpec{0.7, 2, 3});
    EXPECT_EQ(tr.rows(), 7);
    EXPECT_EQ(va.rows(), 3);
}

TEST(Dataset, SplitSizeAtFullDataScale) {
    const Index n = 253803;
    const ChoiceDataset ds(MatrixXd::Zero(n, 1), std::vector<int>(static_cast<std::size_t>(n), 0), 2);
    const auto [tr, va] = split(ds, SplitSpec{});
    EXPECT_EQ(tr.rows(), 177662);
    EXPECT_EQ(va.rows(), n - 177662);
}

TEST(Dataset, SplitIsDeterministicPermutation) {
    const ChoiceDataset ds = small_dataset(57);
    const auto a = split(ds, SplitSpec{0.7, 2, 11});
    const auto b = split(ds, SplitSpec{0.7, 2, 11});
    EXPECT_EQ(a.first.x(), b.first.x());
    EXPECT_EQ(a.second.choices(), b.second.choices());

    MatrixXd joined(ds.rows(), ds.features() + 1);
    joined << a.first.x(), Eigen::Map<const Eigen::VectorXi>(a.first.choices().data(), a.first.rows()).cast<double>(),
        a.second.x(), Eigen::Map<const Eigen::VectorXi>(a.second.choices().data(), a.second.rows()).cast<double>();
    MatrixXd orig(ds.rows(), ds.features() + 1);
    orig << ds.x(), Eigen::Map<const Eigen::VectorXi>(ds.choices().data(), ds.rows()).cast<double>();
    EXPECT_EQ(sorted_rows(joined), sorted_rows(orig));
    EXPECT_NE(split(ds, SplitSpec{0.7, 2, 12}).first.x(), a.first.x());
}

TEST(Dataset, SplitRejectsDegenerateInputs) {
    EXPECT_THROW(split(small_dataset(1), SplitSpec{}), DomainError);
    EXPECT_THROW(split(small_dataset(10), SplitSpec{1.0, 2, 0}), DomainError);
    EXPECT_THROW(split(small_dataset(2), SplitSpec{0.1, 2, 0}), DomainError);
}

TEST(Dataset, KFoldCoversRowsOnce) {
    const ChoiceDataset ds = small_dataset(4);
    const auto folds = kfold(ds, 2, 5);
    ASSERT_EQ(folds.size(), 2u);
    MatrixXd valid_rows(4, 3);
    valid_rows << folds[0].second.x(), folds[1].second.x();
    EXPECT_EQ(folds[0].second.rows(), 2);
    EXPECT_EQ(folds[1].second.rows(), 2);
    EXPECT_EQ(sorted_rows(valid_rows), sorted_rows(ds.x()));
}

TEST(Dataset, KFoldLeaveOneOut) {
    const ChoiceDataset ds = small_dataset(6);
    const auto folds = kfold(ds, 6, 2);
    ASSERT_EQ(folds.size(), 6u);
    for (const auto& [tr, va] : folds) {
        EXPECT_EQ(va.rows(), 1);
        EXPECT_EQ(tr.rows(), 5);
    }
    const auto again = kfold(ds, 6, 2);
    for (std::size_t f = 0; f < 6; ++f) EXPECT_EQ(again[f].second.x(), folds[f].second.x());
    EXPECT_THROW(kfold(ds, 7, 2), DomainError);
    EXPECT_THROW(kfold(ds, 1, 2), DomainError);
}

TEST(Dataset, LoadsTwentyFeatureThirteenAlternativeTable) {
    const std::vector<std::string> names{"age",      "loyalty",  "income",      "sex",      "employee",
                                         "active",   "new_cust", "resident",    "foreigner", "european",
                                         "vip",      "savings",  "current",     "derivada", "payroll_acc",
                                         "junior",   "masparti", "particular",  "partiplus", "e_acc"};
    TempDir dir("ds");
    std::string text = "choice";
    for (const auto& n : names) text += "," + n;
    text += "\n";
    for (int r = 0; r < 26; ++r) {
        text += std::to_string(r % 13 + 1);
        for (std::size_t k = 0; k < names.size(); ++k) text += "," + std::to_string(r * 0.5 + static_cast<double>(k));
        text += "\n";
    }
    write_file(dir.file("t.csv"), text);
    const ChoiceDataset ds = load_csv(dir.file("t.csv"), "choice");
    EXPECT_EQ(ds.features(), 20);
    EXPECT_EQ(ds.alternatives(), 13);
    EXPECT_EQ(ds.feature_names(), names);
}

TEST(Dataset, CsvErrors) {
    TempDir dir("ds");
    write_file(dir.file("missing.csv"), "choice,x\n1,\n2,1\n");
    EXPECT_THROW(load_csv_raw(dir.file("missing.csv"), "choice"), ParseError);
    write_file(dir.file("zero.csv"), "choice,x\n0,1\n2,1\n");
    EXPECT_THROW(load_csv_raw(dir.file("zero.csv"), "choice"), DomainError);
    write_file(dir.file("frac.csv"), "choice,x\n1.5,1\n2,1\n");
    EXPECT_THROW(load_csv_raw(dir.file("frac.csv"), "choice"), DomainError);
    write_file(dir.file("ragged.csv"), "choice,x\n1,1,3\n2,1\n");
    EXPECT_THROW(load_csv_raw(dir.file("ragged.csv"), "choice"), Error);
    write_file(dir.file("nochoice.csv"), "pick,x\n1,1\n2,1\n");
    EXPECT_THROW(load_csv_raw(dir.file("nochoice.csv"), "choice"), SchemaError);
    EXPECT_THROW(load_csv_raw(dir.file("nochoice.csv"), "pick", {"y"}), SchemaError);
    write_file(dir.file("range.csv"), "choice,x\n1,1\n3,1\n");
    EXPECT_THROW(load_csv_raw(dir.file("range.csv"), "choice", {}, 2), DomainError);
    EXPECT_THROW(load_csv_raw(dir.file("absent.csv"), "choice"), Error);
}

TEST(Dataset, CsvBomQuotesAndRoundTrip) {
    TempDir dir("ds");
    write_file(dir.file("b.csv"), "\xEF\xBB\xBF\"choice\",\"a,b\",c\n2,1.25,-3\n1,\"2\",4e-1\n");
    const ChoiceDataset ds = load_csv_raw(dir.file("b.csv"), "choice");
    EXPECT_EQ(ds.feature_names(), (std::vector<std::string>{"a,b", "c"}));
    EXPECT_EQ(ds.x()(1, 1), 0.4);
    write_csv(ds, dir.file("out.csv"));
    const ChoiceDataset back = load_csv_raw(dir.file("out.csv"), "choice");
    EXPECT_EQ(back.x(), ds.x());
    EXPECT_EQ(back.choices(), ds.choices());
    EXPECT_EQ(back.feature_names(), ds.feature_names());
}

TEST(Dataset, ZeroFeatureDatasetIsAllowed) {
    const ChoiceDataset ds(MatrixXd(3, 0), {0, 1, 1}, 2);
    EXPECT_EQ(ds.features(), 0);
    const auto shares = ds.choice_shares();
    EXPECT_DOUBLE_EQ(shares[0], 1.0 / 3.0);
    EXPECT_DOUBLE_EQ(shares[1], 2.0 / 3.0);
}
