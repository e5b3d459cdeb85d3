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
#include "detail/parallel.hpp"
#include "inference.hpp"
#include "model.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <optional>
#include <vector>

namespace choicerbm {

/// Two-sided 95% normal quantile used to flag significant parameters.
inline constexpr double kSignificanceThreshold = 1.96;

inline bool significant(double t, double threshold = kSignificanceThreshold) { return std::abs(t) >= threshold; }

namespace detail {
inline constexpr std::size_t kStatsChunk = 4096;

inline void check_compatible(const CrbmParams& p, const ChoiceDataset& ds) {
    if (ds.features() != p.features() || ds.alternatives() != p.alternatives()) {
        throw DimensionError("dataset shape (K=" + std::to_string(ds.features()) + ", I=" +
                             std::to_string(ds.alternatives()) + ") does not match model (K=" +
                             std::to_string(p.features()) + ", I=" + std::to_string(p.alternatives()) + ")");
    }
}
}  // namespace detail

/// Log-likelihood, argmax accuracy and mean probability of the observed
/// choice, all under the mean-field predictive distribution.
struct FitSummary {
    double loglik = 0.0;
    double error = 0.0;
    double mean_true_probability = 0.0;
    Index rows = 0;
};

inline FitSummary summarize_fit(const CrbmParams& p, const ChoiceDataset& ds) {
    detail::check_compatible(p, ds);
    const auto n = static_cast<std::size_t>(ds.rows());
    const std::size_t chunks = detail::chunk_count(n, detail::kStatsChunk);
    std::vector<double> ll(chunks, 0.0), ptrue(chunks, 0.0);
    std::vector<std::int64_t> correct(chunks, 0);
    detail::for_each_chunk(n, detail::kStatsChunk, [&](std::size_t ci, std::size_t begin, std::size_t end) {
        const auto b = static_cast<Index>(begin), len = static_cast<Index>(end - begin);
        const MatrixXd h = detail::sigmoid(context_drive(p, ds.x().middleRows(b, len)));
        MatrixXd logp = choice_logits(p, ds.x().middleRows(b, len), h);
        MatrixXd probs = logp;
        detail::softmax_rows(probs);
        for (Index r = 0; r < len; ++r) {
            if (detail::argmax(probs.row(r)) == ds.choice(b + r)) ++correct[ci];
        }
        detail::log_softmax_rows(logp);
        for (Index r = 0; r < len; ++r) {
            const double lp = logp(r, ds.choice(b + r));
            ll[ci] += lp;
            ptrue[ci] += std::exp(lp);
        }
    });
    FitSummary s;
    std::int64_t hits = 0;
    for (std::size_t c = 0; c < chunks; ++c) {
        s.loglik += ll[c];
        s.mean_true_probability += ptrue[c];
        hits += correct[c];
    }
    s.rows = ds.rows();
    s.mean_true_probability /= static_cast<double>(n);
    s.error = 1.0 - static_cast<double>(hits) / static_cast<double>(n);
    return s;
}

/// Sum over rows of log p(y_obs | x) with mean-field hidden activations.
/// For J = 0 this is the exact multinomial logit log-likelihood.
inline double log_likelihood(const CrbmParams& p, const ChoiceDataset& ds) { return summarize_fit(p, ds).loglik; }

/// McFadden rho-squared against the equal-shares null n * ln(1/I).
inline double rho_squared(double loglik, long long n, int alternatives) {
    const double null_ll = static_cast<double>(n) * std::log(1.0 / static_cast<double>(alternatives));
    return 1.0 - loglik / null_ll;
}

inline double bic(double loglik, long long n_params, long long n) {
    return -2.0 * loglik + static_cast<double>(n_params) * std::log(static_cast<double>(n));
}

struct ValidationResult {
    double error = 0.0;
    double accuracy = 0.0;
    double mean_true_probability = 0.0;
};

/// 1 - argmax accuracy on held-out rows.
inline ValidationResult validation_error(const CrbmParams& p, const ChoiceDataset& valid) {
    const FitSummary s = summarize_fit(p, valid);
    return {s.error, 1.0 - s.error, s.mean_true_probability};
}

// ---------------------------------------------------------------------------
// Standard errors

/// Moore-Penrose inverse of a symmetric positive semi-definite matrix.
/// Eigen-directions below rel_tol * max eigenvalue are dropped; their count
/// is written to `dropped` when non-null.
inline MatrixXd psd_pseudo_inverse(const MatrixXd& m, double rel_tol = 1e-10, Index* dropped = nullptr) {
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(m);
    const VectorXd& lambda = es.eigenvalues();
    const double top = lambda.size() ? std::max(lambda.maxCoeff(), 0.0) : 0.0;
    VectorXd inv = VectorXd::Zero(lambda.size());
    Index n_dropped = 0;
    for (Index i = 0; i < lambda.size(); ++i) {
        if (lambda(i) > rel_tol * top && lambda(i) > 0.0) {
            inv(i) = 1.0 / lambda(i);
        } else {
            ++n_dropped;
        }
    }
    if (dropped) *dropped = n_dropped;
    return es.eigenvectors() * inv.asDiagonal() * es.eigenvectors().transpose();
}

/// Outer-product-of-gradients (BHHH) standard errors from a matrix whose
/// rows are per-observation score vectors.
inline VectorXd opg_standard_errors(const MatrixXd& scores, Index* dropped = nullptr) {
    const MatrixXd info = scores.transpose() * scores;
    return psd_pseudo_inverse(info, 1e-10, dropped).diagonal().cwiseMax(0.0).cwiseSqrt();
}

/// Standard errors and t-statistics laid out like the parameters.
struct ParameterSignificance {
    CrbmParams std_errs;
    CrbmParams tstats;
    /// A and d errors come from a separate block and ignore cross terms.
    bool hidden_block_approximate = true;
};

namespace detail {

/// Per-row scores of the mean-field log-likelihood with respect to the
/// prediction-model blocks, packed as [vec(B), vec(D), c] (column-major).
inline Index prediction_score_width(const CrbmParams& p) {
    return p.alternatives() * (p.features() + p.hidden() + 1);
}

inline void prediction_scores(const CrbmParams& p, const MatrixXd& x, const MatrixXd& h, const MatrixXd& resid,
                              MatrixXd& out) {
    const Index I = p.alternatives(), K = p.features(), J = p.hidden();
    out.resize(x.rows(), prediction_score_width(p));
    for (Index k = 0; k < K; ++k) out.middleCols(k * I, I) = resid.array().colwise() * x.col(k).array();
    for (Index j = 0; j < J; ++j) out.middleCols((K + j) * I, I) = resid.array().colwise() * h.col(j).array();
    out.middleCols((K + J) * I, I) = resid;
}

/// Per-row scores with respect to [vec(A), d], back-propagated through the
/// mean-field activation.
inline void hidden_scores(const CrbmParams& p, const MatrixXd& x, const MatrixXd& h, const MatrixXd& resid,
                          MatrixXd& out) {
    const Index J = p.hidden(), K = p.features();
    const MatrixXd s = ((resid * p.D).array() * h.array() * (1.0 - h.array())).matrix();
    out.resize(x.rows(), J * (K + 1));
    for (Index k = 0; k < K; ++k) out.middleCols(k * J, J) = s.array().colwise() * x.col(k).array();
    out.middleCols(K * J, J) = s;
}

}  // namespace detail

/// OPG standard errors and t = theta / se for every block.
///
/// The softmax is invariant to adding a constant across alternatives, so
/// the information matrix always has K + J + 1 null directions; a
/// pseudo-inverse is used and a warning is raised only when the rank loss
/// goes beyond that.
inline ParameterSignificance t_statistics(const CrbmParams& p, const ChoiceDataset& train) {
    detail::check_compatible(p, train);
    const Index I = p.alternatives(), J = p.hidden(), K = p.features();
    const long long n_params = param_count(I, J, K);
    if (train.rows() <= n_params) {
        warn("t-statistics: " + std::to_string(train.rows()) + " rows for " + std::to_string(n_params) +
             " parameters");
    }
    const Index w_pred = detail::prediction_score_width(p);
    const Index w_hid = J * (K + 1);
    const auto n = static_cast<std::size_t>(train.rows());
    const std::size_t chunks = detail::chunk_count(n, detail::kStatsChunk);
    std::vector<MatrixXd> info_pred(chunks), info_hid(chunks);
    detail::for_each_chunk(n, detail::kStatsChunk, [&](std::size_t ci, std::size_t begin, std::size_t end) {
        const auto b = static_cast<Index>(begin), len = static_cast<Index>(end - begin);
        const auto x = train.x().middleRows(b, len);
        const MeanField mf = mean_field(p, x);
        const MatrixXd resid = train.y().middleRows(b, len) - mf.probs;
        MatrixXd g;
        detail::prediction_scores(p, x, mf.h, resid, g);
        info_pred[ci] = g.transpose() * g;
        if (w_hid > 0) {
            detail::hidden_scores(p, x, mf.h, resid, g);
            info_hid[ci] = g.transpose() * g;
        }
    });
    MatrixXd pred = MatrixXd::Zero(w_pred, w_pred);
    MatrixXd hid = MatrixXd::Zero(w_hid, w_hid);
    for (std::size_t c = 0; c < chunks; ++c) {
        pred += info_pred[c];
        if (w_hid > 0) hid += info_hid[c];
    }

    Index dropped = 0;
    const VectorXd se_pred = psd_pseudo_inverse(pred, 1e-10, &dropped).diagonal().cwiseMax(0.0).cwiseSqrt();
    if (dropped > K + J + 1) {
        warn("information matrix is rank deficient (" + std::to_string(dropped) +
             " null directions); standard errors use a pseudo-inverse");
    }
    VectorXd se_hid = VectorXd::Zero(w_hid);
    if (w_hid > 0) se_hid = psd_pseudo_inverse(hid).diagonal().cwiseMax(0.0).cwiseSqrt();

    ParameterSignificance out;
    out.std_errs = CrbmParams::zeros(I, J, K);
    out.std_errs.B = se_pred.segment(0, I * K).reshaped(I, K);
    out.std_errs.D = se_pred.segment(I * K, I * J).reshaped(I, J);
    out.std_errs.c = se_pred.segment(I * (K + J), I);
    out.std_errs.A = se_hid.segment(0, J * K).reshaped(J, K);
    out.std_errs.d = se_hid.segment(J * K, J);

    out.tstats = CrbmParams::zeros(I, J, K);
    auto ratio = [](double theta, double se) { return se > 0.0 ? theta / se : 0.0; };
    out.tstats.B = p.B.binaryExpr(out.std_errs.B, ratio);
    out.tstats.D = p.D.binaryExpr(out.std_errs.D, ratio);
    out.tstats.A = p.A.binaryExpr(out.std_errs.A, ratio);
    out.tstats.c = p.c.binaryExpr(out.std_errs.c, ratio);
    out.tstats.d = p.d.binaryExpr(out.std_errs.d, ratio);
    return out;
}

/// Standard errors of (B, D, c) from a central finite-difference Hessian of
/// the mean-field log-likelihood. Limited to 50 coordinates; A and d are
/// left at zero.
inline CrbmParams hessian_standard_errors(const CrbmParams& p, const ChoiceDataset& train, double step = 1e-4) {
    detail::check_compatible(p, train);
    const Index I = p.alternatives(), J = p.hidden(), K = p.features();
    const Index w = I * (K + J + 1);
    if (w > 50) throw DomainError("finite-difference Hessian is limited to 50 parameters");
    auto coord = [&](CrbmParams& q, Index a) -> double& {
        if (a < I * K) return q.B(a % I, a / I);
        a -= I * K;
        if (a < I * J) return q.D(a % I, a / I);
        return q.c(a - I * J);
    };
    auto f = [&](Index a, double da, Index b, double db) {
        CrbmParams q = p;
        coord(q, a) += da;
        coord(q, b) += db;
        return log_likelihood(q, train);
    };
    MatrixXd hess(w, w);
    for (Index a = 0; a < w; ++a) {
        for (Index b = a; b < w; ++b) {
            const double v = (f(a, step, b, step) - f(a, step, b, -step) - f(a, -step, b, step) +
                              f(a, -step, b, -step)) /
                             (4.0 * step * step);
            hess(a, b) = v;
            hess(b, a) = v;
        }
    }
    const VectorXd se = psd_pseudo_inverse(-hess, 1e-8).diagonal().cwiseMax(0.0).cwiseSqrt();
    CrbmParams out = CrbmParams::zeros(I, J, K);
    out.B = se.segment(0, I * K).reshaped(I, K);
    out.D = se.segment(I * K, I * J).reshaped(I, J);
    out.c = se.segment(I * (K + J), I);
    return out;
}

// ---------------------------------------------------------------------------

/// Table-style summary of a fitted model.
struct FitReport {
    double loglik_train = 0.0;
    double loglik_valid = 0.0;
    double rho2 = 0.0;
    double bic = 0.0;
    double validation_error = 0.0;
    double mean_true_probability = 0.0;
    long long n_params = 0;
    long long n_train = 0;
    Index hidden = 0;
    ConfusionMatrix confusion;
    std::optional<ParameterSignificance> significance;
};

/// rho-squared and BIC use the training log-likelihood and training size.
inline FitReport make_fit_report(const CrbmParams& p, const ChoiceDataset& train, const ChoiceDataset& valid,
                                 bool with_tstats = true) {
    FitReport r;
    const FitSummary tr = summarize_fit(p, train);
    const FitSummary va = summarize_fit(p, valid);
    r.loglik_train = tr.loglik;
    r.loglik_valid = va.loglik;
    r.n_train = train.rows();
    r.n_params = param_count(p.alternatives(), p.hidden(), p.features());
    r.rho2 = rho_squared(tr.loglik, r.n_train, p.alternatives());
    r.bic = bic(tr.loglik, r.n_params, r.n_train);
    r.validation_error = va.error;
    r.mean_true_probability = va.mean_true_probability;
    r.hidden = p.hidden();
    r.confusion = predict_batch(p, valid).confusion;
    if (with_tstats) r.significance = t_statistics(p, train);
    return r;
}

}  // namespace choicerbm
