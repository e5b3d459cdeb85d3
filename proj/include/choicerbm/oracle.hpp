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
#include "detail/numeric.hpp"
#include "detail/random.hpp"
#include "detail/text.hpp"
#include "error.hpp"
#include "model.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <fstream>
#include <string>
#include <vector>

// Brute-force references. Everything here enumerates the 2^J hidden states
// explicitly and shares no arithmetic with the softplus / mean-field paths
// it is used to check.

namespace choicerbm::oracle {

inline constexpr Index kMaxAlternatives = 16;
inline constexpr Index kMaxHidden = 12;

inline void check_enumerable(const CrbmParams& p) {
    if (p.hidden() > kMaxHidden) throw DomainError("enumeration limited to J <= 12");
    if (p.alternatives() > kMaxAlternatives) throw DomainError("enumeration limited to I <= 16");
}

/// Hidden configuration number `code` as a 0/1 vector (bit j = unit j).
inline VectorXd hidden_state(std::uint32_t code, Index hidden) {
    VectorXd h(hidden);
    for (Index j = 0; j < hidden; ++j) h(j) = (code >> j) & 1u ? 1.0 : 0.0;
    return h;
}

/// log of the unnormalized joint weight of (y = i, h) given clamped x:
/// -Energy(e_i, h) + h.(A x) + (B x)_i, one row per alternative and one
/// column per hidden configuration.
inline MatrixXd joint_log_weights(const CrbmParams& p, const VectorXd& x) {
    check_enumerable(p);
    const Index I = p.alternatives(), J = p.hidden();
    const auto states = std::uint32_t{1} << J;
    const VectorXd ax = p.A * x;
    const VectorXd bx = p.B * x;
    MatrixXd lw(I, states);
    for (std::uint32_t s = 0; s < states; ++s) {
        const VectorXd h = hidden_state(s, J);
        for (Index i = 0; i < I; ++i) {
            double v = p.c(i) + bx(i);
            for (Index j = 0; j < J; ++j) v += h(j) * (p.d(j) + p.D(i, j) + ax(j));
            lw(i, s) = v;
        }
    }
    return lw;
}

/// Exact p(y = i | x) by summing over every hidden configuration.
inline VectorXd exact_choice_distribution(const CrbmParams& p, const VectorXd& x) {
    detail::expect_size(x.size(), p.features(), "x");
    const MatrixXd lw = joint_log_weights(p, x);
    const double z = detail::log_sum_exp(lw.reshaped());
    VectorXd out(lw.rows());
    for (Index i = 0; i < lw.rows(); ++i) out(i) = std::exp(detail::log_sum_exp(lw.row(i).transpose()) - z);
    return out;
}

inline double exact_log_likelihood(const CrbmParams& p, const ChoiceDataset& ds) {
    double ll = 0.0;
    for (Index n = 0; n < ds.rows(); ++n) {
        const MatrixXd lw = joint_log_weights(p, ds.x().row(n).transpose());
        ll += detail::log_sum_exp(lw.row(ds.choice(n)).transpose()) - detail::log_sum_exp(lw.reshaped());
    }
    return ll;
}

/// Exact gradient of sum_n log p(y_n | x_n) by enumeration: expectations of
/// the sufficient statistics under p(h | y_n, x_n) minus those under
/// p(y, h | x_n).
inline CrbmGradient exact_loglik_gradient(const CrbmParams& p, const ChoiceDataset& ds) {
    check_enumerable(p);
    const Index I = p.alternatives(), J = p.hidden(), K = p.features();
    const auto states = std::uint32_t{1} << J;
    CrbmGradient g = CrbmParams::zeros(I, J, K);
    for (Index n = 0; n < ds.rows(); ++n) {
        const VectorXd x = ds.x().row(n).transpose();
        const Index obs = ds.choice(n);
        const MatrixXd lw = joint_log_weights(p, x);
        const MatrixXd joint = (lw.array() - detail::log_sum_exp(lw.reshaped())).exp().matrix();
        const VectorXd post = (lw.row(obs).array() - detail::log_sum_exp(lw.row(obs).transpose())).exp().matrix();

        VectorXd h_data = VectorXd::Zero(J), h_model = VectorXd::Zero(J);
        VectorXd y_model = VectorXd::Zero(I);
        MatrixXd yh_model = MatrixXd::Zero(I, J);
        for (std::uint32_t s = 0; s < states; ++s) {
            const VectorXd h = hidden_state(s, J);
            h_data += post(s) * h;
            for (Index i = 0; i < I; ++i) {
                y_model(i) += joint(i, s);
                h_model += joint(i, s) * h;
                yh_model.row(i) += joint(i, s) * h.transpose();
            }
        }
        VectorXd y_data = VectorXd::Zero(I);
        y_data(obs) = 1.0;

        g.c += y_data - y_model;
        g.B += (y_data - y_model) * x.transpose();
        g.d += h_data - h_model;
        g.A += (h_data - h_model) * x.transpose();
        g.D.row(obs) += h_data.transpose();
        g.D -= yh_model;
    }
    return g;
}

/// KL(p || q) for two probability vectors; terms with p_i = 0 contribute 0.
inline double kl_divergence(const VectorXd& p, const VectorXd& q) {
    double kl = 0.0;
    for (Index i = 0; i < p.size(); ++i) {
        if (p(i) > 0.0) kl += p(i) * (std::log(p(i)) - std::log(q(i)));
    }
    return kl;
}

// ---------------------------------------------------------------------------
// Planted models

/// Distribution of one context column.
struct ContextColumn {
    enum class Kind { normal, bernoulli };
    Kind kind = Kind::normal;
    double mean = 0.0;  // Normal mean
    double std = 1.0;   // Normal standard deviation
    double rate = 0.5;  // Bernoulli success probability
};

/// Ground-truth parameters, context distribution, size and seed.
struct PlantedModel {
    CrbmParams params;
    std::vector<ContextColumn> context;
    Index rows = 0;
    std::uint64_t seed = 0;

    void validate() const {
        params.validate();
        check_enumerable(params);
        if (static_cast<Index>(context.size()) != params.features()) {
            throw DimensionError("context spec has " + std::to_string(context.size()) + " columns, model has " +
                                 std::to_string(params.features()));
        }
        if (rows < 1) throw DomainError("planted model needs at least one row");
    }
};

/// Draws x from the context spec, then y from the exact choice distribution.
inline ChoiceDataset generate(const PlantedModel& pm) {
    pm.validate();
    const Index K = pm.params.features();
    Rng rng(pm.seed);
    MatrixXd x(pm.rows, K);
    std::vector<int> choices(static_cast<std::size_t>(pm.rows));
    for (Index n = 0; n < pm.rows; ++n) {
        for (Index k = 0; k < K; ++k) {
            const auto& col = pm.context[static_cast<std::size_t>(k)];
            x(n, k) = col.kind == ContextColumn::Kind::normal ? col.mean + col.std * detail::standard_normal(rng)
                                                              : (detail::bernoulli(rng, col.rate) ? 1.0 : 0.0);
        }
        const VectorXd probs = exact_choice_distribution(pm.params, x.row(n).transpose());
        choices[static_cast<std::size_t>(n)] = static_cast<int>(detail::categorical(probs, rng));
    }
    return ChoiceDataset(std::move(x), std::move(choices), static_cast<int>(pm.params.alternatives()));
}

/// Writes a planted model as `block,row,col,value` records (1-based
/// indices). Zero parameters are omitted.
inline void write_planted_csv(const PlantedModel& pm, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write '" + path + "'");
    const auto& p = pm.params;
    auto num = [](double v) { return detail::format_double(v); };
    out << "block,row,col,value\n";
    out << "I,,," << p.alternatives() << "\nJ,,," << p.hidden() << "\nK,,," << p.features() << '\n';
    out << "rows,,," << pm.rows << "\nseed,,," << pm.seed << '\n';
    auto matrix = [&](const char* name, const MatrixXd& m) {
        for (Index c = 0; c < m.cols(); ++c)
            for (Index r = 0; r < m.rows(); ++r)
                if (m(r, c) != 0.0) out << name << ',' << r + 1 << ',' << c + 1 << ',' << num(m(r, c)) << '\n';
    };
    auto vector = [&](const char* name, const VectorXd& v) {
        for (Index r = 0; r < v.size(); ++r)
            if (v(r) != 0.0) out << name << ',' << r + 1 << ",," << num(v(r)) << '\n';
    };
    matrix("D", p.D);
    matrix("B", p.B);
    matrix("A", p.A);
    vector("c", p.c);
    vector("d", p.d);
    for (std::size_t k = 0; k < pm.context.size(); ++k) {
        const auto& col = pm.context[k];
        if (col.kind == ContextColumn::Kind::bernoulli) {
            out << "x_bernoulli," << k + 1 << ",," << num(col.rate) << '\n';
        } else {
            out << "x_mean," << k + 1 << ",," << num(col.mean) << '\n';
            out << "x_std," << k + 1 << ",," << num(col.std) << '\n';
        }
    }
}

/// Reads the format written by write_planted_csv. Unlisted parameters are
/// zero and unlisted context columns are standard normal.
inline PlantedModel read_planted_csv(const std::string& path) {
    const auto table = detail::read_csv(path);
    for (const char* col : {"block", "row", "col", "value"}) {
        if (!table.column(col)) throw SchemaError(path + ": missing column '" + col + "'");
    }
    const std::size_t cb = *table.column("block"), cr = *table.column("row"), cc = *table.column("col"),
                      cv = *table.column("value");
    long long I = -1, J = -1, K = -1;
    PlantedModel pm;
    auto value_of = [&](std::size_t r) {
        auto v = detail::parse_double(table.rows[r][cv]);
        if (!v) throw ParseError(path + ": row " + std::to_string(r + 1) + ": bad value '" + table.rows[r][cv] + "'");
        return *v;
    };
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        const auto& b = table.rows[r][cb];
        if (b == "I") I = static_cast<long long>(value_of(r));
        if (b == "J") J = static_cast<long long>(value_of(r));
        if (b == "K") K = static_cast<long long>(value_of(r));
        if (b == "rows") pm.rows = static_cast<Index>(value_of(r));
        if (b == "seed") pm.seed = static_cast<std::uint64_t>(value_of(r));
    }
    if (I < 2 || J < 0 || K < 0) throw SchemaError(path + ": dimensions I, J, K must be given (I >= 2)");
    pm.params = CrbmParams::zeros(I, J, K);
    pm.context.assign(static_cast<std::size_t>(K), ContextColumn{});
    auto index = [&](std::size_t r, std::size_t col, long long limit) -> Index {
        auto v = detail::parse_double(table.rows[r][col]);
        if (!v || *v != std::floor(*v) || *v < 1 || *v > static_cast<double>(limit)) {
            throw DomainError(path + ": row " + std::to_string(r + 1) + ": index '" + table.rows[r][col] +
                              "' outside 1.." + std::to_string(limit));
        }
        return static_cast<Index>(*v) - 1;
    };
    auto& p = pm.params;
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        const auto& b = table.rows[r][cb];
        if (b == "I" || b == "J" || b == "K" || b == "rows" || b == "seed") continue;
        const double v = value_of(r);
        if (b == "D") p.D(index(r, cr, I), index(r, cc, J)) = v;
        else if (b == "B") p.B(index(r, cr, I), index(r, cc, K)) = v;
        else if (b == "A") p.A(index(r, cr, J), index(r, cc, K)) = v;
        else if (b == "c") p.c(index(r, cr, I)) = v;
        else if (b == "d") p.d(index(r, cr, J)) = v;
        else if (b == "x_mean") pm.context[static_cast<std::size_t>(index(r, cr, K))].mean = v;
        else if (b == "x_std") pm.context[static_cast<std::size_t>(index(r, cr, K))].std = v;
        else if (b == "x_bernoulli") {
            auto& col = pm.context[static_cast<std::size_t>(index(r, cr, K))];
            col.kind = ContextColumn::Kind::bernoulli;
            col.rate = v;
        } else {
            throw SchemaError(path + ": row " + std::to_string(r + 1) + ": unknown block '" + b + "'");
        }
    }
    return pm;
}

}  // namespace choicerbm::oracle
