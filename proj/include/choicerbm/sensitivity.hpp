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

#include "dataset.hpp"
#include "detail/random.hpp"
#include "error.hpp"
#include "stats.hpp"
#include "trainer.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <string>
#include <vector>

namespace choicerbm {

/// Ranks 1..n by descending value; equal values keep their input order.
inline std::vector<int> descending_ranks(const std::vector<double>& values) {
    std::vector<std::size_t> order(values.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return values[a] > values[b]; });
    std::vector<int> ranks(values.size());
    for (std::size_t r = 0; r < order.size(); ++r) ranks[order[r]] = static_cast<int>(r + 1);
    return ranks;
}

/// Spearman rank correlation (Pearson correlation of the rank vectors).
inline double rank_agreement(const std::vector<int>& a, const std::vector<int>& b) {
    if (a.size() != b.size()) throw DimensionError("rank vectors differ in length");
    if (a.size() < 2) throw DomainError("rank correlation needs at least two entries");
    const auto n = static_cast<double>(a.size());
    const double ma = std::accumulate(a.begin(), a.end(), 0.0) / n;
    const double mb = std::accumulate(b.begin(), b.end(), 0.0) / n;
    double sab = 0.0, saa = 0.0, sbb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        sab += (a[i] - ma) * (b[i] - mb);
        saa += (a[i] - ma) * (a[i] - ma);
        sbb += (b[i] - mb) * (b[i] - mb);
    }
    if (saa == 0.0 || sbb == 0.0) throw DomainError("rank correlation undefined for constant ranks");
    return sab / std::sqrt(saa * sbb);
}

/// Scalar standard error per explanatory variable: root mean square over
/// the variable's I alternative-specific B errors. The last entry is the
/// same aggregate over the choice biases c.
inline std::vector<double> variable_sensitivity(const CrbmParams& std_errs) {
    std::vector<double> out;
    for (Index k = 0; k < std_errs.B.cols(); ++k) out.push_back(std::sqrt(std_errs.B.col(k).squaredNorm() / std_errs.B.rows()));
    out.push_back(std::sqrt(std_errs.c.squaredNorm() / std_errs.c.size()));
    return out;
}

struct SensitivityRow {
    std::string variable;
    int full_rank = 0;
    int sample_rank = 0;
    double full_std_err = 0.0;
    double sample_std_err = 0.0;  // mean over replicates
    double std_err_diff_pct = 0.0;  // mean relative difference, percent
    double std_err_diff_pct_sd = 0.0;
};

/// Full-versus-subsample ranking of per-variable standard errors.
struct SensitivityReport {
    Index hidden = 0;
    double fraction = 0.0;
    Index full_rows = 0;
    Index sample_rows = 0;
    std::vector<std::uint64_t> seeds;          // subsample seed of each replicate
    std::vector<SensitivityRow> rows;          // K variables, then "bias"
    std::vector<std::vector<int>> replicate_ranks;
    std::vector<double> replicate_spearman;
    double spearman = 0.0;  // full ranks versus the aggregated sample ranks
};

inline Index subsample_size(Index n, double fraction) {
    return static_cast<Index>(std::floor(fraction * static_cast<double>(n)));
}

/// Sampling-based sensitivity analysis.
///
/// `ds` is split once (70/30, seeded) into a fitting set and a validation set
/// used only for early stopping. The model is fitted on the whole fitting
/// set and on `replicates` simple random subsamples of floor(fraction * n)
/// rows drawn without replacement (row order preserved). Every fit uses the
/// same training config, so fraction = 1 reproduces the full fit exactly.
inline SensitivityReport sensitivity_run(const ChoiceDataset& ds, Index hidden, const TrainConfig& cfg,
                                         double fraction, int replicates, std::uint64_t seed) {
    if (!(fraction > 0.0 && fraction <= 1.0)) throw DomainError("sample fraction must lie in (0, 1]");
    if (replicates < 1) throw DomainError("need at least one replicate");
    const auto parts = split(ds, SplitSpec{0.70, 2, seed});
    const ChoiceDataset& train = parts.first;
    const ChoiceDataset& valid = parts.second;
    const Index n = train.rows();
    const Index n_sub = subsample_size(n, fraction);
    if (n_sub < cfg.batch_size) {
        throw DomainError("subsample of " + std::to_string(n_sub) + " rows is smaller than the batch size " +
                          std::to_string(cfg.batch_size));
    }

    auto fit_errors = [&](const ChoiceDataset& data) {
        const TrainResult fit = hidden == 0 ? train_mnl(data, valid, cfg) : train_crbm(data, valid, hidden, cfg);
        return variable_sensitivity(t_statistics(fit.params, data).std_errs);
    };

    SensitivityReport rep;
    rep.hidden = hidden;
    rep.fraction = fraction;
    rep.full_rows = n;
    rep.sample_rows = n_sub;

    const std::vector<double> full = fit_errors(train);
    const std::vector<int> full_ranks = descending_ranks(full);
    const std::size_t vars = full.size();

    std::vector<double> mean_sub(vars, 0.0);
    std::vector<std::vector<double>> diffs(vars);
    for (int r = 0; r < replicates; ++r) {
        const std::uint64_t sub_seed = detail::derive_seed(seed, 100 + static_cast<std::uint64_t>(r));
        rep.seeds.push_back(sub_seed);
        Rng rng(sub_seed);
        std::vector<std::size_t> rows = detail::permutation(static_cast<std::size_t>(n), rng);
        rows.resize(static_cast<std::size_t>(n_sub));
        std::sort(rows.begin(), rows.end());
        const std::vector<double> sub = fit_errors(train.subset(rows));
        const std::vector<int> ranks = descending_ranks(sub);
        rep.replicate_ranks.push_back(ranks);
        rep.replicate_spearman.push_back(rank_agreement(full_ranks, ranks));
        for (std::size_t v = 0; v < vars; ++v) {
            mean_sub[v] += sub[v] / replicates;
            diffs[v].push_back(full[v] > 0.0 ? 100.0 * std::abs(sub[v] - full[v]) / full[v] : 0.0);
        }
    }
    const std::vector<int> sample_ranks = descending_ranks(mean_sub);
    rep.spearman = rank_agreement(full_ranks, sample_ranks);

    for (std::size_t v = 0; v < vars; ++v) {
        SensitivityRow row;
        row.variable = v < static_cast<std::size_t>(ds.features()) ? ds.feature_names()[v] : "bias";
        row.full_rank = full_ranks[v];
        row.sample_rank = sample_ranks[v];
        row.full_std_err = full[v];
        row.sample_std_err = mean_sub[v];
        const double m = std::accumulate(diffs[v].begin(), diffs[v].end(), 0.0) / replicates;
        double ss = 0.0;
        for (double d : diffs[v]) ss += (d - m) * (d - m);
        row.std_err_diff_pct = m;
        row.std_err_diff_pct_sd = replicates > 1 ? std::sqrt(ss / (replicates - 1)) : 0.0;
        rep.rows.push_back(row);
    }
    return rep;
}

}  // namespace choicerbm
