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
using choicerbm::testing::random_params;
using choicerbm::testing::sample_dataset;

namespace {

// Closed-form Spearman for untied ranks.
double spearman_closed_form(const std::vector<int>& a, const std::vector<int>& b) {
    const double n = static_cast<double>(a.size());
    double d2 = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) d2 += static_cast<double>((a[i] - b[i]) * (a[i] - b[i]));
    return 1.0 - 6.0 * d2 / (n * (n * n - 1.0));
}

TrainConfig quick_config() {
    TrainConfig cfg;
    cfg.epochs = 4;
    cfg.learning_rate = 0.02;
    cfg.batch_size = 32;
    return cfg;
}

}  // namespace

TEST(Sensitivity, DescendingRanksBreakTiesByInputOrder) {
    EXPECT_EQ(descending_ranks({0.5, 2.0, 0.5, 1.0}), (std::vector<int>{3, 1, 4, 2}));
    EXPECT_EQ(descending_ranks({}), std::vector<int>{});
}

TEST(Sensitivity, RankAgreementExamples) {
    const std::vector<int> a{1, 2, 3, 4, 5};
    EXPECT_DOUBLE_EQ(rank_agreement(a, a), 1.0);
    EXPECT_DOUBLE_EQ(rank_agreement(a, {5, 4, 3, 2, 1}), -1.0);
    const std::vector<int> b{2, 1, 4, 5, 3};
    EXPECT_NEAR(rank_agreement(a, b), spearman_closed_form(a, b), 1e-15);
    EXPECT_NEAR(rank_agreement(a, b), 0.6, 1e-15);
    EXPECT_THROW(rank_agreement(a, {1, 2}), DimensionError);
    EXPECT_THROW(rank_agreement({1}, {1}), DomainError);
}

TEST(Sensitivity, SubsampleSize) {
    EXPECT_EQ(subsample_size(76141, 0.1), 7614);
    EXPECT_EQ(subsample_size(10, 1.0), 10);
}

TEST(Sensitivity, VariableSensitivityIsRootMeanSquare) {
    CrbmParams se = CrbmParams::zeros(2, 1, 2);
    se.B << 3.0, 1.0, 4.0, 1.0;
    se.c << 1.0, 7.0;
    const auto v = variable_sensitivity(se);
    ASSERT_EQ(v.size(), 3u);
    EXPECT_DOUBLE_EQ(v[0], std::sqrt(12.5));
    EXPECT_DOUBLE_EQ(v[1], 1.0);
    EXPECT_DOUBLE_EQ(v[2], 5.0);
}

TEST(Sensitivity, FullFractionReproducesFullFit) {
    Rng rng(1);
    const ChoiceDataset ds = normalize(sample_dataset(random_params(3, 1, 3, rng), 600, 2));
    const SensitivityReport rep = sensitivity_run(ds, 1, quick_config(), 1.0, 1, 5);
    EXPECT_EQ(rep.full_rows, 420);
    EXPECT_EQ(rep.sample_rows, 420);
    EXPECT_EQ(rep.spearman, 1.0);
    ASSERT_EQ(rep.rows.size(), 4u);
    EXPECT_EQ(rep.rows.back().variable, "bias");
    for (const auto& row : rep.rows) {
        EXPECT_EQ(row.std_err_diff_pct, 0.0);
        EXPECT_EQ(row.full_rank, row.sample_rank);
        EXPECT_EQ(row.full_std_err, row.sample_std_err);
    }
}

TEST(Sensitivity, DeterministicAndRanksArePermutations) {
    Rng rng(3);
    const ChoiceDataset ds = normalize(sample_dataset(random_params(3, 1, 4, rng), 1500, 4));
    const SensitivityReport a = sensitivity_run(ds, 1, quick_config(), 0.5, 2, 9);
    const SensitivityReport b = sensitivity_run(ds, 1, quick_config(), 0.5, 2, 9);
    ASSERT_EQ(a.rows.size(), b.rows.size());
    std::vector<int> full, sample;
    for (std::size_t v = 0; v < a.rows.size(); ++v) {
        EXPECT_EQ(a.rows[v].full_std_err, b.rows[v].full_std_err);
        EXPECT_EQ(a.rows[v].sample_std_err, b.rows[v].sample_std_err);
        EXPECT_EQ(a.rows[v].std_err_diff_pct, b.rows[v].std_err_diff_pct);
        full.push_back(a.rows[v].full_rank);
        sample.push_back(a.rows[v].sample_rank);
    }
    EXPECT_EQ(a.seeds, b.seeds);
    EXPECT_EQ(a.seeds.size(), 2u);
    EXPECT_NE(a.seeds[0], a.seeds[1]);
    std::sort(full.begin(), full.end());
    std::sort(sample.begin(), sample.end());
    for (std::size_t v = 0; v < full.size(); ++v) {
        EXPECT_EQ(full[v], static_cast<int>(v + 1));
        EXPECT_EQ(sample[v], static_cast<int>(v + 1));
    }
}

TEST(Sensitivity, RejectsBadArguments) {
    Rng rng(5);
    const ChoiceDataset ds = normalize(sample_dataset(random_params(3, 1, 2, rng), 300, 6));
    EXPECT_THROW(sensitivity_run(ds, 1, quick_config(), 0.0, 1, 0), DomainError);
    EXPECT_THROW(sensitivity_run(ds, 1, quick_config(), 1.5, 1, 0), DomainError);
    EXPECT_THROW(sensitivity_run(ds, 1, quick_config(), 0.5, 0, 0), DomainError);
    EXPECT_THROW(sensitivity_run(ds, 1, quick_config(), 0.1, 1, 0), DomainError);
}
