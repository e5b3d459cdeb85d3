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
#include "error.hpp"
#include "model.hpp"
#include "stats.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <string>
#include <vector>

namespace choicerbm {

/// Optimization schedule for contrastive divergence and the MNL baseline.
struct TrainConfig {
    int cd_k = 1;
    int batch_size = 64;
    int epochs = 400;
    double learning_rate = 1e-3;
    double momentum_initial = 0.5;
    double momentum_final = 0.9;
    int momentum_switch_epoch = 5;  // epochs run at momentum_initial
    std::uint64_t seed = 0;
    int early_stop_patience = 20;  // 0 disables early stopping
    double weight_init_scale = 0.01;
    bool lr_decay = false;       // learning_rate / (1 + epoch)
    double weight_decay = 0.0;   // L2 on D, B, A
    bool init_bias_from_shares = true;

    void validate() const {
        auto require = [](bool ok, const char* what) {
            if (!ok) throw DomainError(std::string("invalid training config: ") + what);
        };
        require(cd_k >= 1, "cd_k must be >= 1");
        require(batch_size >= 1, "batch_size must be >= 1");
        require(epochs >= 1, "epochs must be >= 1");
        require(learning_rate >= 0.0 && std::isfinite(learning_rate), "learning_rate must be >= 0");
        require(momentum_initial >= 0.0 && momentum_initial < 1.0, "momentum_initial must be in [0,1)");
        require(momentum_final >= 0.0 && momentum_final < 1.0, "momentum_final must be in [0,1)");
        require(momentum_switch_epoch >= 0, "momentum_switch_epoch must be >= 0");
        require(early_stop_patience >= 0, "early_stop_patience must be >= 0");
        require(weight_init_scale > 0.0 && std::isfinite(weight_init_scale), "weight_init_scale must be > 0");
        require(weight_decay >= 0.0 && std::isfinite(weight_decay), "weight_decay must be >= 0");
    }

    double momentum(int epoch) const { return epoch < momentum_switch_epoch ? momentum_initial : momentum_final; }
    double rate(int epoch) const { return lr_decay ? learning_rate / (1.0 + epoch) : learning_rate; }
};

/// Metrics recorded after each epoch (epoch is 1-based).
struct EpochRecord {
    int epoch = 0;
    double train_nll = 0.0;  // mean negative log-likelihood per training row
    double train_loglik = 0.0;
    double valid_error = 0.0;
    double valid_loglik = 0.0;
    double reconstruction_error = 0.0;
};

struct TrainTrace {
    std::vector<EpochRecord> epochs;
    int best_epoch = 0;  // 1-based epoch of the returned snapshot
    bool stopped_early = false;

    const EpochRecord& best() const { return epochs.at(static_cast<std::size_t>(best_epoch - 1)); }
};

struct TrainResult {
    CrbmParams params;
    TrainTrace trace;
};

/// Called after every epoch with the record and current (not best) parameters.
using EpochObserver = std::function<void(const EpochRecord&, const CrbmParams&)>;

/// Gradient estimate for one minibatch.
struct CdStep {
    CrbmGradient grad;
    double reconstruction_error = 0.0;  // mean squared gap between y and p(y | h_k, x)
};

namespace detail {

inline MatrixXd bernoulli_matrix(const MatrixXd& probs, Rng& rng) {
    MatrixXd out(probs.rows(), probs.cols());
    for (Index r = 0; r < probs.rows(); ++r) {
        for (Index j = 0; j < probs.cols(); ++j) out(r, j) = bernoulli(rng, probs(r, j)) ? 1.0 : 0.0;
    }
    return out;
}

inline MatrixXd categorical_rows(const MatrixXd& probs, Rng& rng) {
    MatrixXd out = MatrixXd::Zero(probs.rows(), probs.cols());
    for (Index r = 0; r < probs.rows(); ++r) out(r, categorical(probs.row(r).transpose(), rng)) = 1.0;
    return out;
}

/// B and c gradients from residuals y - p, averaged over the batch. Shared by
/// the CD and MNL paths so that J = 0 produces identical arithmetic.
inline void visible_gradient(const MatrixXd& resid, const MatrixXd& x, CrbmGradient& g) {
    const auto n = static_cast<double>(resid.rows());
    g.B.noalias() = resid.transpose() * x;
    g.B /= n;
    g.c = resid.colwise().sum().transpose() / n;
}

inline double reconstruction_error(const MatrixXd& resid) {
    return resid.squaredNorm() / static_cast<double>(resid.rows());
}

}  // namespace detail

/// Contrastive-divergence gradient for one minibatch.
///
/// Positive phase: hidden probabilities given the observed choice and
/// context. Negative phase: a Gibbs chain started at the data alternates
/// binary hidden samples and one-hot choice samples for cd_k steps. The
/// chain closes on the choice probabilities p(y | h, x) instead of a sample:
/// negative statistics are expectations over that reconstruction, summed
/// over the I alternatives. Context rows are clamped throughout.
inline CdStep cd_step(const CrbmParams& p, const MatrixXd& x, const MatrixXd& y, const TrainConfig& cfg, Rng& rng) {
    if (x.rows() == 0) throw DomainError("empty minibatch");
    if (x.rows() != y.rows() || x.cols() != p.features() || y.cols() != p.alternatives()) {
        throw DimensionError("minibatch shape does not match the model");
    }
    const auto n = static_cast<double>(x.rows());
    const MatrixXd h_pos = detail::sigmoid(hidden_drive(p, x, y));

    MatrixXd h_sample = detail::bernoulli_matrix(h_pos, rng);
    MatrixXd p_neg;
    for (int step = 1;; ++step) {
        p_neg = choice_logits(p, x, h_sample);
        detail::softmax_rows(p_neg);
        if (step == cfg.cd_k) break;
        const MatrixXd y_neg = detail::categorical_rows(p_neg, rng);
        h_sample = detail::bernoulli_matrix(detail::sigmoid(hidden_drive(p, x, y_neg)), rng);
    }

    CdStep out;
    out.grad = CrbmParams::zeros(p.alternatives(), p.hidden(), p.features());
    const MatrixXd resid = y - p_neg;
    detail::visible_gradient(resid, x, out.grad);
    if (p.hidden() > 0) {
        const MatrixXd context = context_drive(p, x);
        MatrixXd h_neg = MatrixXd::Zero(x.rows(), p.hidden());
        MatrixXd d_neg(p.alternatives(), p.hidden());
        for (Index i = 0; i < p.alternatives(); ++i) {
            MatrixXd h_i = context.rowwise() + p.D.row(i);
            h_i = detail::sigmoid(h_i);
            d_neg.row(i).noalias() = p_neg.col(i).transpose() * h_i;
            h_neg.noalias() += p_neg.col(i).asDiagonal() * h_i;
        }
        out.grad.D.noalias() = y.transpose() * h_pos;
        out.grad.D -= d_neg;
        out.grad.D /= n;
        const MatrixXd h_diff = h_pos - h_neg;
        out.grad.d = h_diff.colwise().sum().transpose() / n;
        out.grad.A.noalias() = h_diff.transpose() * x;
        out.grad.A /= n;
    }
    out.reconstruction_error = detail::reconstruction_error(resid);
    return out;
}

/// Exact minibatch gradient of the multinomial logit log-likelihood.
inline CdStep mnl_gradient(const CrbmParams& p, const MatrixXd& x, const MatrixXd& y) {
    if (x.rows() == 0) throw DomainError("empty minibatch");
    MatrixXd probs = choice_logits(p, x, MatrixXd(x.rows(), 0));
    detail::softmax_rows(probs);
    CdStep out;
    out.grad = CrbmParams::zeros(p.alternatives(), 0, p.features());
    const MatrixXd resid = y - probs;
    detail::visible_gradient(resid, x, out.grad);
    out.reconstruction_error = detail::reconstruction_error(resid);
    return out;
}

/// Seeded initial parameters: B, D, A ~ Normal(0, scale^2) drawn in that
/// order, d = 0, c = log empirical choice shares (or 0).
inline CrbmParams initial_params(const ChoiceDataset& train, Index hidden, const TrainConfig& cfg) {
    const Index I = train.alternatives(), K = train.features();
    CrbmParams p = CrbmParams::zeros(I, hidden, K);
    Rng rng(detail::derive_seed(cfg.seed, 0));
    auto fill = [&](MatrixXd& m) {
        for (Index k = 0; k < m.size(); ++k) m.data()[k] = cfg.weight_init_scale * detail::standard_normal(rng);
    };
    fill(p.B);
    fill(p.D);
    fill(p.A);
    if (cfg.init_bias_from_shares) {
        const auto shares = train.choice_shares();
        const double floor_share = 0.5 / static_cast<double>(train.rows());
        for (Index i = 0; i < I; ++i) p.c(i) = std::log(std::max(shares[static_cast<std::size_t>(i)], floor_share));
    }
    return p;
}

namespace detail {

template <typename GradientFn>
TrainResult run_training(const ChoiceDataset& train, const ChoiceDataset& valid, CrbmParams params,
                         const TrainConfig& cfg, GradientFn&& gradient, const EpochObserver& observer) {
    cfg.validate();
    if (train.features() != valid.features() || train.alternatives() != valid.alternatives()) {
        throw DimensionError("training and validation sets disagree on K or I");
    }
    Rng shuffle_rng(derive_seed(cfg.seed, 1));
    Rng gibbs_rng(derive_seed(cfg.seed, 2));

    CrbmGradient velocity = CrbmParams::zeros(params.alternatives(), params.hidden(), params.features());
    TrainResult result{params, {}};
    double best_error = std::numeric_limits<double>::infinity();
    double best_ll = -std::numeric_limits<double>::infinity();
    int since_best = 0;

    const auto n = static_cast<std::size_t>(train.rows());
    const auto bsz = static_cast<std::size_t>(cfg.batch_size);
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    MatrixXd xb, yb;
    const std::vector<double> shares_vec = train.choice_shares();
    const VectorXd shares = Eigen::Map<const VectorXd>(shares_vec.data(), static_cast<Index>(shares_vec.size()));

    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        shuffle(order, shuffle_rng);
        const double mu = cfg.momentum(epoch);
        const double lr = cfg.rate(epoch);
        double recon = 0.0;
        std::size_t batches = 0;
        for (std::size_t begin = 0; begin < n; begin += bsz) {
            const std::size_t end = std::min(n, begin + bsz);
            const auto rows = static_cast<Index>(end - begin);
            xb.resize(rows, train.features());
            yb.resize(rows, train.alternatives());
            for (Index r = 0; r < rows; ++r) {
                const auto src = static_cast<Index>(order[begin + static_cast<std::size_t>(r)]);
                xb.row(r) = train.x().row(src);
                yb.row(r) = train.y().row(src);
            }
            CdStep step = gradient(params, xb, yb, gibbs_rng);
            if (cfg.weight_decay > 0.0) {
                step.grad.D -= cfg.weight_decay * params.D;
                step.grad.B -= cfg.weight_decay * params.B;
                step.grad.A -= cfg.weight_decay * params.A;
            }
            velocity.D = mu * velocity.D + lr * step.grad.D;
            velocity.B = mu * velocity.B + lr * step.grad.B;
            velocity.A = mu * velocity.A + lr * step.grad.A;
            velocity.c = mu * velocity.c + lr * step.grad.c;
            velocity.d = mu * velocity.d + lr * step.grad.d;
            params.D += velocity.D;
            params.B += velocity.B;
            params.A += velocity.A;
            params.c += velocity.c;
            params.d += velocity.d;
            recon += step.reconstruction_error;
            ++batches;
        }
        if (!params.all_finite()) {
            throw DivergedTraining(epoch + 1, "training diverged at epoch " + std::to_string(epoch + 1) +
                                                  ": non-finite parameter");
        }
        // Evaluated and stored in the centered gauge; the SGD state itself is
        // left alone so learning_rate = 0 really leaves it untouched.
        CrbmParams snapshot = params;
        center_hidden_couplings(snapshot, shares);

        const FitSummary tr = summarize_fit(snapshot, train);
        const FitSummary va = summarize_fit(snapshot, valid);
        EpochRecord rec;
        rec.epoch = epoch + 1;
        rec.train_loglik = tr.loglik;
        rec.train_nll = -tr.loglik / static_cast<double>(train.rows());
        rec.valid_error = va.error;
        rec.valid_loglik = va.loglik;
        rec.reconstruction_error = recon / static_cast<double>(batches);
        result.trace.epochs.push_back(rec);
        if (observer) observer(rec, snapshot);

        if (va.error < best_error || (va.error == best_error && va.loglik > best_ll)) {
            best_error = va.error;
            best_ll = va.loglik;
            result.params = std::move(snapshot);
            result.trace.best_epoch = rec.epoch;
            since_best = 0;
        } else if (cfg.early_stop_patience > 0 && ++since_best >= cfg.early_stop_patience) {
            result.trace.stopped_early = true;
            break;
        }
    }
    return result;
}

}  // namespace detail

/// Fits a C-RBM with `hidden` latent units by CD-k minibatch SGD with
/// momentum, keeping the snapshot with the lowest validation error.
inline TrainResult train_crbm(const ChoiceDataset& train, const ChoiceDataset& valid, Index hidden,
                              const TrainConfig& cfg, const EpochObserver& observer = {}) {
    if (hidden < 0) throw DomainError("hidden unit count must be >= 0");
    return detail::run_training(
        train, valid, initial_params(train, hidden, cfg), cfg,
        [&cfg](const CrbmParams& p, const MatrixXd& x, const MatrixXd& y, Rng& rng) {
            return cd_step(p, x, y, cfg, rng);
        },
        observer);
}

/// Multinomial logit baseline with the same schedule and early stopping.
inline TrainResult train_mnl(const ChoiceDataset& train, const ChoiceDataset& valid, const TrainConfig& cfg,
                             const EpochObserver& observer = {}) {
    return detail::run_training(
        train, valid, initial_params(train, 0, cfg), cfg,
        [](const CrbmParams& p, const MatrixXd& x, const MatrixXd& y, Rng&) { return mnl_gradient(p, x, y); },
        observer);
}

/// Validation errors of k-fold cross-validation on raw (unscaled) data;
/// each fold is normalized with its own training statistics.
inline std::vector<double> cross_validate(const ChoiceDataset& raw, int folds, Index hidden, const TrainConfig& cfg,
                                          std::uint64_t seed) {
    std::vector<double> errors;
    for (const auto& [tr_raw, va_raw] : kfold(raw, folds, seed)) {
        const NormStats stats = fit_norm_stats(tr_raw.x());
        const ChoiceDataset tr = apply_normalization(tr_raw, stats);
        const ChoiceDataset va = apply_normalization(va_raw, stats);
        const TrainResult fit = hidden == 0 ? train_mnl(tr, va, cfg) : train_crbm(tr, va, hidden, cfg);
        errors.push_back(fit.trace.best().valid_error);
    }
    return errors;
}

}  // namespace choicerbm
