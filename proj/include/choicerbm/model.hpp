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

#include "detail/numeric.hpp"
#include "detail/random.hpp"
#include "error.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <string>

namespace choicerbm {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

/// Parameters of a conditional RBM over I alternatives, J binary hidden units
/// and K clamped context variables.
///
///   D  I x J  choice-hidden weights
///   B  I x K  choice-context weights
///   A  J x K  hidden-context weights
///   c  I      choice biases
///   d  J      hidden biases
///
/// J = 0 is a plain multinomial logit in (B, c).
struct CrbmParams {
    MatrixXd D;
    MatrixXd B;
    MatrixXd A;
    VectorXd c;
    VectorXd d;

    static CrbmParams zeros(Index alternatives, Index hidden, Index features) {
        return {MatrixXd::Zero(alternatives, hidden), MatrixXd::Zero(alternatives, features),
                MatrixXd::Zero(hidden, features), VectorXd::Zero(alternatives), VectorXd::Zero(hidden)};
    }

    Index alternatives() const { return c.size(); }
    Index hidden() const { return d.size(); }
    Index features() const { return B.cols(); }

    bool consistent() const {
        const Index I = alternatives(), J = hidden(), K = features();
        return D.rows() == I && D.cols() == J && B.rows() == I && A.rows() == J && A.cols() == K;
    }

    bool all_finite() const {
        return D.allFinite() && B.allFinite() && A.allFinite() && c.allFinite() && d.allFinite();
    }

    /// Throws if shapes disagree or any entry is non-finite.
    void validate() const {
        if (!consistent()) throw DimensionError("inconsistent parameter block shapes");
        if (alternatives() < 2) throw DimensionError("model needs at least two alternatives");
        if (!all_finite()) throw DomainError("non-finite parameter entry");
    }
};

/// Gradients, velocities and standard errors share the parameter layout.
using CrbmGradient = CrbmParams;

/// Calls fn(name, block) for D, B, A, c, d in that order.
template <typename P, typename Fn>
void for_each_block(P& p, Fn&& fn) {
    fn("D", p.D);
    fn("B", p.B);
    fn("A", p.A);
    fn("c", p.c);
    fn("d", p.d);
}

/// Number of free parameters: I*J + K*I + K*J + J + I.
constexpr long long param_count(long long alternatives, long long hidden, long long features) {
    return alternatives * hidden + features * alternatives + features * hidden + hidden + alternatives;
}

/// Concatenates every block (column-major) in D, B, A, c, d order.
inline VectorXd flatten(const CrbmParams& p) {
    VectorXd out(param_count(p.alternatives(), p.hidden(), p.features()));
    Index pos = 0;
    for_each_block(p, [&](const char*, const auto& block) {
        out.segment(pos, block.size()) = block.reshaped();
        pos += block.size();
    });
    return out;
}

inline CrbmParams unflatten(const VectorXd& v, Index alternatives, Index hidden, Index features) {
    if (v.size() != param_count(alternatives, hidden, features)) throw DimensionError("flat vector length mismatch");
    CrbmParams p = CrbmParams::zeros(alternatives, hidden, features);
    Index pos = 0;
    for_each_block(p, [&](const char*, auto& block) {
        block.reshaped() = v.segment(pos, block.size());
        pos += block.size();
    });
    return p;
}

namespace detail {

inline void expect_size(Index got, Index want, const char* what) {
    if (got != want) {
        throw DimensionError(std::string(what) + " has length " + std::to_string(got) + ", expected " +
                             std::to_string(want));
    }
}

}  // namespace detail

/// Energy of a joint (y, h) configuration. Context enters only through the
/// conditionals, never the energy.
inline double energy(const CrbmParams& p, const VectorXd& y, const VectorXd& h) {
    detail::expect_size(y.size(), p.alternatives(), "y");
    detail::expect_size(h.size(), p.hidden(), "h");
    return -y.dot(p.c) - h.dot(p.d) - y.dot(p.D * h);
}

/// F(y) = -c.y - sum_j softplus(D[:,j].y + d_j).
inline double free_energy(const CrbmParams& p, const VectorXd& y) {
    detail::expect_size(y.size(), p.alternatives(), "y");
    const VectorXd drive = p.D.transpose() * y + p.d;
    double f = -p.c.dot(y);
    for (Index j = 0; j < drive.size(); ++j) f -= detail::softplus(drive(j));
    return f;
}

/// Free energy of alternative i with the context terms folded in:
/// -c_i - (B x)_i - sum_j softplus(D_ij + d_j + (A x)_j).
/// exp(-F) is proportional to p(y = i | x) under the clamped-context joint.
inline double conditional_free_energy(const CrbmParams& p, Index i, const VectorXd& x) {
    detail::expect_size(x.size(), p.features(), "x");
    if (i < 0 || i >= p.alternatives()) throw DimensionError("alternative index out of range");
    const VectorXd drive = p.D.row(i).transpose() + p.d + p.A * x;
    double f = -p.c(i) - p.B.row(i).dot(x);
    for (Index j = 0; j < drive.size(); ++j) f -= detail::softplus(drive(j));
    return f;
}

/// Hidden activation probabilities sigma(d + D^T y + A x).
inline VectorXd p_h_given_yx(const CrbmParams& p, const VectorXd& y, const VectorXd& x) {
    detail::expect_size(y.size(), p.alternatives(), "y");
    detail::expect_size(x.size(), p.features(), "x");
    VectorXd drive = p.d + p.D.transpose() * y + p.A * x;
    return drive.unaryExpr([](double z) { return detail::sigmoid(z); });
}

/// Choice probabilities softmax(B x + D h + c); h may be binary or a
/// vector of activation probabilities.
inline VectorXd p_y_given_hx(const CrbmParams& p, const VectorXd& h, const VectorXd& x) {
    detail::expect_size(h.size(), p.hidden(), "h");
    detail::expect_size(x.size(), p.features(), "x");
    VectorXd logits = p.B * x + p.c;
    if (p.hidden() > 0) logits += p.D * h;
    return detail::softmax(logits);
}

namespace detail {

inline VectorXd bernoulli_vector(const VectorXd& probs, Rng& rng) {
    VectorXd out(probs.size());
    for (Index j = 0; j < probs.size(); ++j) out(j) = bernoulli(rng, probs(j)) ? 1.0 : 0.0;
    return out;
}

/// Inverse-CDF categorical draw; returns the sampled index.
inline Index categorical(const VectorXd& probs, Rng& rng) {
    const double u = uniform01(rng);
    double acc = 0.0;
    for (Index i = 0; i < probs.size(); ++i) {
        acc += probs(i);
        if (u < acc) return i;
    }
    // u landed in the rounding slack above the cumulative sum
    for (Index i = probs.size() - 1; i > 0; --i) {
        if (probs(i) > 0.0) return i;
    }
    return 0;
}

inline VectorXd one_hot(Index i, Index size) {
    VectorXd v = VectorXd::Zero(size);
    v(i) = 1.0;
    return v;
}

}  // namespace detail

inline VectorXd sample_h(const CrbmParams& p, const VectorXd& y, const VectorXd& x, Rng& rng) {
    return detail::bernoulli_vector(p_h_given_yx(p, y, x), rng);
}

inline VectorXd sample_y(const CrbmParams& p, const VectorXd& h, const VectorXd& x, Rng& rng) {
    return detail::one_hot(detail::categorical(p_y_given_hx(p, h, x), rng), p.alternatives());
}

/// State of a Gibbs chain with clamped context.
struct GibbsState {
    VectorXd y;
    VectorXd h_prob;
    VectorXd h_sample;
    VectorXd x;
};

/// One full transition: h ~ p(h | y, x), then y ~ p(y | h, x).
inline void gibbs_step(const CrbmParams& p, GibbsState& s, Rng& rng) {
    s.h_prob = p_h_given_yx(p, s.y, s.x);
    s.h_sample = detail::bernoulli_vector(s.h_prob, rng);
    s.y = sample_y(p, s.h_sample, s.x, rng);
}

/// Moves the weighted mean of each D column into d. The shift
/// D(., j) -= t, d(j) += t leaves p(y | x) and every Gibbs conditional
/// unchanged, but sigma(d + A x) is evaluated at the `weights`-averaged
/// alternative afterwards, which is what the mean-field predictor needs.
inline void center_hidden_couplings(CrbmParams& p, const VectorXd& weights) {
    detail::expect_size(weights.size(), p.alternatives(), "weights");
    for (Index j = 0; j < p.hidden(); ++j) {
        const double t = weights.dot(p.D.col(j));
        p.D.col(j).array() -= t;
        p.d(j) += t;
    }
}

// ---------------------------------------------------------------------------
// Batched forms, rows are observations.

/// Hidden pre-activations Y D + X A^T + d (N x J).
inline MatrixXd hidden_drive(const CrbmParams& p, const MatrixXd& x, const MatrixXd& y) {
    MatrixXd drive = y * p.D;
    drive.noalias() += x * p.A.transpose();
    drive.rowwise() += p.d.transpose();
    return drive;
}

/// Hidden pre-activations from context only, X A^T + d (N x J).
inline MatrixXd context_drive(const CrbmParams& p, const MatrixXd& x) {
    MatrixXd drive = x * p.A.transpose();
    drive.rowwise() += p.d.transpose();
    return drive;
}

/// Choice logits X B^T + c + H D^T (N x I).
inline MatrixXd choice_logits(const CrbmParams& p, const MatrixXd& x, const MatrixXd& h) {
    MatrixXd logits = x * p.B.transpose();
    logits.rowwise() += p.c.transpose();
    if (p.hidden() > 0) logits.noalias() += h * p.D.transpose();
    return logits;
}

}  // namespace choicerbm
