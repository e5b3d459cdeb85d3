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

#pragma once

#include "detail/random.hpp"
#include "detail/text.hpp"
#include "error.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <fstream>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace choicerbm {

/// Per-column z-score statistics. Constant columns keep their mean and are
/// mapped to zero.
struct NormStats {
    Eigen::VectorXd mean;
    Eigen::VectorXd std;
    std::vector<bool> constant;

    static NormStats identity(Eigen::Index k) {
        return {Eigen::VectorXd::Zero(k), Eigen::VectorXd::Ones(k), std::vector<bool>(k, false)};
    }
    Eigen::Index size() const { return mean.size(); }
};

/// Explanatory matrix x (N x K) with a one-hot choice matrix y (N x I).
///
/// Immutable once built; every transformation returns a new dataset whose y
/// is rebuilt from the integer choices, so the one-hot property cannot drift.
class ChoiceDataset {
public:
    ChoiceDataset(Eigen::MatrixXd x, std::vector<int> choices, int n_alternatives,
                  std::vector<std::string> feature_names = {},
                  std::vector<std::string> alternative_names = {},
                  std::optional<NormStats> norm = std::nullopt)
        : x_(std::move(x)),
          choices_(std::move(choices)),
          feature_names_(std::move(feature_names)),
          alternative_names_(std::move(alternative_names)) {
        if (x_.rows() == 0) throw DomainError("dataset must contain at least one row");
        if (n_alternatives < 2) throw DomainError("dataset needs at least two alternatives");
        if (static_cast<Eigen::Index>(choices_.size()) != x_.rows()) {
            throw DimensionError("choice vector length " + std::to_string(choices_.size()) +
                                 " does not match " + std::to_string(x_.rows()) + " rows");
        }
        if (feature_names_.empty()) {
            for (Eigen::Index k = 0; k < x_.cols(); ++k) feature_names_.push_back("x" + std::to_string(k + 1));
        }
        if (alternative_names_.empty()) {
            for (int i = 0; i < n_alternatives; ++i) alternative_names_.push_back("alt" + std::to_string(i + 1));
        }
        if (static_cast<Eigen::Index>(feature_names_.size()) != x_.cols()) {
            throw DimensionError("feature name count does not match feature columns");
        }
        if (static_cast<int>(alternative_names_.size()) != n_alternatives) {
            throw DimensionError("alternative name count does not match alternatives");
        }
        norm_ = norm ? std::move(*norm) : NormStats::identity(x_.cols());
        if (norm_.size() != x_.cols()) throw DimensionError("norm stats do not match feature columns");
        y_ = Eigen::MatrixXd::Zero(x_.rows(), n_alternatives);
        for (std::size_t n = 0; n < choices_.size(); ++n) {
            const int c = choices_[n];
            if (c < 0 || c >= n_alternatives) {
                throw DomainError("row " + std::to_string(n) + ": choice " + std::to_string(c + 1) +
                                  " outside 1.." + std::to_string(n_alternatives));
            }
            y_(static_cast<Eigen::Index>(n), c) = 1.0;
        }
    }

    const Eigen::MatrixXd& x() const { return x_; }
    const Eigen::MatrixXd& y() const { return y_; }
    /// Zero-based chosen alternative of row n.
    int choice(Eigen::Index n) const { return choices_[static_cast<std::size_t>(n)]; }
    const std::vector<int>& choices() const { return choices_; }

    Eigen::Index rows() const { return x_.rows(); }
    Eigen::Index features() const { return x_.cols(); }
    int alternatives() const { return static_cast<int>(y_.cols()); }

    const std::vector<std::string>& feature_names() const { return feature_names_; }
    const std::vector<std::string>& alternative_names() const { return alternative_names_; }
    const NormStats& norm_stats() const { return norm_; }

    ChoiceDataset subset(std::span<const std::size_t> rows) const {
        Eigen::MatrixXd x(static_cast<Eigen::Index>(rows.size()), x_.cols());
        std::vector<int> ch(rows.size());
        for (std::size_t r = 0; r < rows.size(); ++r) {
            if (rows[r] >= choices_.size()) throw DomainError("subset row index out of range");
            x.row(static_cast<Eigen::Index>(r)) = x_.row(static_cast<Eigen::Index>(rows[r]));
            ch[r] = choices_[rows[r]];
        }
        return ChoiceDataset(std::move(x), std::move(ch), alternatives(), feature_names_, alternative_names_, norm_);
    }

    /// Same rows with a replaced explanatory matrix and stats.
    ChoiceDataset with_x(Eigen::MatrixXd x, NormStats norm) const {
        return ChoiceDataset(std::move(x), choices_, alternatives(), feature_names_, alternative_names_,
                             std::move(norm));
    }

    std::vector<double> choice_shares() const {
        std::vector<double> shares(static_cast<std::size_t>(alternatives()), 0.0);
        for (int c : choices_) shares[static_cast<std::size_t>(c)] += 1.0;
        for (auto& s : shares) s /= static_cast<double>(rows());
        return shares;
    }

private:
    Eigen::MatrixXd x_;
    Eigen::MatrixXd y_;
    std::vector<int> choices_;
    std::vector<std::string> feature_names_;
    std::vector<std::string> alternative_names_;
    NormStats norm_;
};

/// Train fraction, fold count and permutation seed.
struct SplitSpec {
    double train_fraction = 0.70;
    int folds = 2;
    std::uint64_t seed = 0;
};

// ---------------------------------------------------------------------------
// Normalization

/// Population mean and standard deviation of each column of x.
inline NormStats fit_norm_stats(const Eigen::MatrixXd& x) {
    const auto n = static_cast<double>(x.rows());
    NormStats s;
    s.mean = x.colwise().sum().transpose() / n;
    s.std.resize(x.cols());
    s.constant.assign(static_cast<std::size_t>(x.cols()), false);
    for (Eigen::Index k = 0; k < x.cols(); ++k) {
        const double var = (x.col(k).array() - s.mean(k)).square().sum() / n;
        s.std(k) = std::sqrt(var);
        if (!(s.std(k) > 1e-12 * std::max(1.0, std::abs(s.mean(k))))) {
            s.std(k) = 0.0;
            s.constant[static_cast<std::size_t>(k)] = true;
        }
    }
    return s;
}

/// Z-scores `raw` with the supplied statistics; constant columns become 0.
inline ChoiceDataset apply_normalization(const ChoiceDataset& raw, const NormStats& stats) {
    if (stats.size() != raw.features()) throw DimensionError("norm stats do not match feature columns");
    Eigen::MatrixXd x = raw.x();
    for (Eigen::Index k = 0; k < x.cols(); ++k) {
        if (stats.constant[static_cast<std::size_t>(k)]) {
            x.col(k).setZero();
        } else {
            x.col(k) = (x.col(k).array() - stats.mean(k)) / stats.std(k);
        }
    }
    return raw.with_x(std::move(x), stats);
}

/// Fits statistics on `raw` and applies them. Warns once per constant column.
inline ChoiceDataset normalize(const ChoiceDataset& raw) {
    NormStats stats = fit_norm_stats(raw.x());
    for (std::size_t k = 0; k < stats.constant.size(); ++k) {
        if (stats.constant[k]) warn("feature '" + raw.feature_names()[k] + "' is constant; left at 0");
    }
    return apply_normalization(raw, stats);
}

/// Maps normalized values back to the original scale.
inline Eigen::MatrixXd denormalize(const Eigen::MatrixXd& x, const NormStats& stats) {
    Eigen::MatrixXd out = x;
    for (Eigen::Index k = 0; k < x.cols(); ++k) {
        if (stats.constant[static_cast<std::size_t>(k)]) {
            out.col(k).setConstant(stats.mean(k));
        } else {
            out.col(k) = x.col(k).array() * stats.std(k) + stats.mean(k);
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// CSV

/// Reads the named feature columns of a CSV table into an N x K matrix.
inline Eigen::MatrixXd read_feature_columns(const detail::CsvTable& table, const std::vector<std::string>& names,
                                            const std::string& path) {
    std::vector<std::size_t> cols;
    for (const auto& name : names) {
        auto c = table.column(name);
        if (!c) throw SchemaError(path + ": missing column '" + name + "'");
        cols.push_back(*c);
    }
    Eigen::MatrixXd x(static_cast<Eigen::Index>(table.rows.size()), static_cast<Eigen::Index>(cols.size()));
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        for (std::size_t k = 0; k < cols.size(); ++k) {
            auto v = detail::parse_double(table.rows[r][cols[k]]);
            if (!v) {
                throw ParseError(path + ": row " + std::to_string(r + 1) + ", column '" + names[k] +
                                 "': not a number: '" + table.rows[r][cols[k]] + "'");
            }
            x(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(k)) = *v;
        }
    }
    return x;
}

/// Loads a choice table without normalizing it.
///
/// `feature_columns` empty selects every column except the choice column.
/// `n_alternatives` 0 infers I as the largest choice value.
inline ChoiceDataset load_csv_raw(const std::string& path, const std::string& choice_column,
                                  std::vector<std::string> feature_columns = {}, int n_alternatives = 0,
                                  std::vector<std::string> alternative_names = {}) {
    const auto table = detail::read_csv(path);
    const auto choice_idx = table.column(choice_column);
    if (!choice_idx) throw SchemaError(path + ": missing column '" + choice_column + "'");
    if (feature_columns.empty()) {
        for (const auto& h : table.header) {
            if (h != choice_column) feature_columns.push_back(h);
        }
    }
    if (table.rows.empty()) throw DomainError(path + ": no data rows");

    std::vector<int> choices(table.rows.size());
    int max_choice = 0;
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        const auto& cell = table.rows[r][*choice_idx];
        auto v = detail::parse_double(cell);
        if (!v) {
            throw ParseError(path + ": row " + std::to_string(r + 1) + ", column '" + choice_column +
                             "': not a number: '" + cell + "'");
        }
        if (*v != std::floor(*v) || *v < 1.0 || *v > 1e9) {
            throw DomainError(path + ": row " + std::to_string(r + 1) + ": choice value " + cell +
                              " is not an integer >= 1");
        }
        choices[r] = static_cast<int>(*v);
        max_choice = std::max(max_choice, choices[r]);
    }
    const int n_alt = n_alternatives > 0 ? n_alternatives : max_choice;
    for (std::size_t r = 0; r < choices.size(); ++r) {
        if (choices[r] > n_alt) {
            throw DomainError(path + ": row " + std::to_string(r + 1) + ": choice " + std::to_string(choices[r]) +
                              " outside 1.." + std::to_string(n_alt));
        }
        --choices[r];
    }
    Eigen::MatrixXd x = read_feature_columns(table, feature_columns, path);
    return ChoiceDataset(std::move(x), std::move(choices), n_alt, std::move(feature_columns),
                         std::move(alternative_names));
}

/// Loads and z-scores a choice table; statistics are kept in norm_stats().
inline ChoiceDataset load_csv(const std::string& path, const std::string& choice_column,
                              std::vector<std::string> feature_columns = {}, int n_alternatives = 0,
                              std::vector<std::string> alternative_names = {}) {
    return normalize(
        load_csv_raw(path, choice_column, std::move(feature_columns), n_alternatives, std::move(alternative_names)));
}

/// Writes x as stored plus the 1-based choice column first.
inline void write_csv(const ChoiceDataset& ds, const std::string& path, const std::string& choice_column = "choice") {
    std::ofstream out(path);
    if (!out) throw Error("cannot write '" + path + "'");
    out << detail::csv_escape(choice_column);
    for (const auto& f : ds.feature_names()) out << ',' << detail::csv_escape(f);
    out << '\n';
    for (Eigen::Index n = 0; n < ds.rows(); ++n) {
        out << ds.choice(n) + 1;
        for (Eigen::Index k = 0; k < ds.features(); ++k) out << ',' << detail::format_double(ds.x()(n, k));
        out << '\n';
    }
}

// ---------------------------------------------------------------------------
// Partitioning

/// Seeded train/validation partition with floor(fraction * N) training rows.
inline std::pair<ChoiceDataset, ChoiceDataset> split(const ChoiceDataset& ds, const SplitSpec& spec) {
    if (!(spec.train_fraction > 0.0 && spec.train_fraction < 1.0)) {
        throw DomainError("train fraction must lie in (0, 1)");
    }
    const auto n = static_cast<std::size_t>(ds.rows());
    if (n < 2) throw DomainError("cannot split a dataset with fewer than 2 rows");
    const auto n_train = static_cast<std::size_t>(std::floor(spec.train_fraction * static_cast<double>(n)));
    if (n_train == 0 || n_train == n) throw DomainError("split leaves an empty partition");
    Rng rng(spec.seed);
    const auto perm = detail::permutation(n, rng);
    std::span<const std::size_t> all(perm);
    return {ds.subset(all.first(n_train)), ds.subset(all.subspan(n_train))};
}

/// Seeded k-fold partition; fold sizes differ by at most one row.
inline std::vector<std::pair<ChoiceDataset, ChoiceDataset>> kfold(const ChoiceDataset& ds, int folds,
                                                                   std::uint64_t seed) {
    const auto n = static_cast<std::size_t>(ds.rows());
    if (folds < 2) throw DomainError("k-fold needs at least 2 folds");
    if (static_cast<std::size_t>(folds) > n) throw DomainError("more folds than rows");
    Rng rng(seed);
    const auto perm = detail::permutation(n, rng);
    const auto k = static_cast<std::size_t>(folds);
    std::vector<std::pair<ChoiceDataset, ChoiceDataset>> out;
    out.reserve(k);
    std::size_t begin = 0;
    for (std::size_t f = 0; f < k; ++f) {
        const std::size_t size = n / k + (f < n % k ? 1 : 0);
        std::vector<std::size_t> train, valid;
        train.reserve(n - size);
        for (std::size_t r = 0; r < n; ++r) {
            (r >= begin && r < begin + size ? valid : train).push_back(perm[r]);
        }
        out.emplace_back(ds.subset(train), ds.subset(valid));
        begin += size;
    }
    return out;
}

}  // namespace choicerbm
