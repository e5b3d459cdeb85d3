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
#include "model.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <vector>

namespace choicerbm {

/// Prediction for one row of context.
struct Prediction {
    VectorXd probs;
    Index predicted = 0;  // zero-based, lowest index wins ties
    VectorXd h_activation;
};

using ConfusionMatrix = Eigen::Matrix<std::int64_t, Eigen::Dynamic, Eigen::Dynamic>;

/// Row-wise predictions plus an (actual x predicted) confusion matrix.
struct BatchPrediction {
    std::vector<Prediction> rows;
    ConfusionMatrix confusion;
};

/// Mean-field hidden activations sigma(X A^T + d) and the resulting choice
/// probabilities, for every row of x.
struct MeanField {
    MatrixXd h;
    MatrixXd probs;
};

inline MeanField mean_field(const CrbmParams& p, const MatrixXd& x) {
    if (x.cols() != p.features()) {
        throw DimensionError("context has " + std::to_string(x.cols()) + " columns, model expects " +
                             std::to_string(p.features()));
    }
    MeanField mf;
    mf.h = detail::sigmoid(context_drive(p, x));
    mf.probs = choice_logits(p, x, mf.h);
    detail::softmax_rows(mf.probs);
    return mf;
}

/// Deterministic prediction: hidden units take their context-only mean-field
/// value (the choice is unknown at prediction time).
inline Prediction predict(const CrbmParams& p, const VectorXd& x) {
    detail::expect_size(x.size(), p.features(), "x");
    Prediction out;
    VectorXd drive = p.A * x + p.d;
    out.h_activation = drive.unaryExpr([](double z) { return detail::sigmoid(z); });
    out.probs = p_y_given_hx(p, out.h_activation, x);
    out.predicted = detail::argmax(out.probs);
    return out;
}

/// Monte-Carlo variant: averages p(y | h, x) over `draws` sampled hidden
/// vectors h ~ Bernoulli(sigma(A x + d)).
inline Prediction predict_mc(const CrbmParams& p, const VectorXd& x, int draws, Rng& rng) {
    if (draws < 1) throw DomainError("need at least one Monte-Carlo draw");
    Prediction out = predict(p, x);
    VectorXd acc = VectorXd::Zero(p.alternatives());
    for (int s = 0; s < draws; ++s) {
        acc += p_y_given_hx(p, detail::bernoulli_vector(out.h_activation, rng), x);
    }
    out.probs = acc / static_cast<double>(draws);
    out.predicted = detail::argmax(out.probs);
    return out;
}

inline BatchPrediction predict_batch(const CrbmParams& p, const ChoiceDataset& ds) {
    if (ds.features() != p.features()) {
        throw DimensionError("dataset has " + std::to_string(ds.features()) + " features, model expects " +
                             std::to_string(p.features()));
    }
    if (ds.alternatives() != p.alternatives()) throw DimensionError("dataset and model disagree on alternatives");
    const auto n = static_cast<std::size_t>(ds.rows());
    BatchPrediction out;
    out.rows.resize(n);
    constexpr std::size_t chunk = 4096;
    detail::for_each_chunk(n, chunk, [&](std::size_t, std::size_t begin, std::size_t end) {
        const auto b = static_cast<Index>(begin), len = static_cast<Index>(end - begin);
        const MeanField mf = mean_field(p, ds.x().middleRows(b, len));
        for (Index r = 0; r < len; ++r) {
            auto& pr = out.rows[begin + static_cast<std::size_t>(r)];
            pr.probs = mf.probs.row(r).transpose();
            pr.h_activation = mf.h.row(r).transpose();
            pr.predicted = detail::argmax(pr.probs);
        }
    });
    out.confusion = ConfusionMatrix::Zero(p.alternatives(), p.alternatives());
    for (std::size_t r = 0; r < n; ++r) {
        out.confusion(ds.choice(static_cast<Index>(r)), out.rows[r].predicted) += 1;
    }
    return out;
}

}  // namespace choicerbm
