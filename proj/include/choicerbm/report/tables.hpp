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

#include "../detail/text.hpp"
#include "../error.hpp"
#include "../inference.hpp"
#include "../sensitivity.hpp"
#include "../stats.hpp"

#include <fstream>
#include <ostream>
#include <string>
#include <vector>

namespace choicerbm {

/// Header of the model comparison table.
inline std::string fit_table_header() {
    return "model,latent_variables,validation_error,log_likelihood,rho2,n_params,bic";
}

/// One comparison-table row: validation error, training log-likelihood,
/// rho-squared, parameter count and BIC.
inline std::string fit_table_row(const FitReport& r) {
    std::string out = r.hidden == 0 ? "MNL" : "CRBM";
    out += ',' + std::to_string(r.hidden);
    out += ',' + detail::format_fixed(r.validation_error, 4);
    out += ',' + detail::format_fixed(r.loglik_train, 0);
    out += ',' + detail::format_fixed(r.rho2, 3);
    out += ',' + std::to_string(r.n_params);
    out += ',' + detail::format_fixed(r.bic, 0);
    return out;
}

/// Full-precision key/value dump of a report, used by `evaluate`.
inline void print_fit_report(std::ostream& out, const FitReport& r, const std::vector<std::string>& alternative_names) {
    out << "validation_error " << detail::format_double(r.validation_error) << '\n';
    out << "mean_true_probability " << detail::format_double(r.mean_true_probability) << '\n';
    out << "loglik_train " << detail::format_double(r.loglik_train) << '\n';
    out << "loglik_valid " << detail::format_double(r.loglik_valid) << '\n';
    out << "rho2 " << detail::format_double(r.rho2) << '\n';
    out << "n_params " << r.n_params << '\n';
    out << "n_train " << r.n_train << '\n';
    out << "bic " << detail::format_double(r.bic) << '\n';
    out << "confusion (rows actual, columns predicted)\n";
    for (Index i = 0; i < r.confusion.rows(); ++i) {
        out << "  " << alternative_names[static_cast<std::size_t>(i)];
        for (Index j = 0; j < r.confusion.cols(); ++j) out << ' ' << r.confusion(i, j);
        out << '\n';
    }
}

/// Batch predictions: row, one probability column per alternative, the
/// 1-based predicted alternative, then the hidden activations.
inline void write_predictions_csv(const BatchPrediction& preds, const std::vector<std::string>& alternative_names,
                                  Index hidden, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write '" + path + "'");
    out << "row";
    for (const auto& a : alternative_names) out << ',' << detail::csv_escape("p_" + a);
    out << ",predicted";
    for (Index j = 0; j < hidden; ++j) out << ",h" << j + 1;
    out << '\n';
    for (std::size_t r = 0; r < preds.rows.size(); ++r) {
        const auto& p = preds.rows[r];
        out << r + 1;
        for (Index i = 0; i < p.probs.size(); ++i) out << ',' << detail::format_double(p.probs(i));
        out << ',' << p.predicted + 1;
        for (Index j = 0; j < p.h_activation.size(); ++j) out << ',' << detail::format_double(p.h_activation(j));
        out << '\n';
    }
}

/// Sensitivity table: one row per variable, one column group per report.
inline void write_sensitivity_csv(const std::vector<SensitivityReport>& reports, std::ostream& out) {
    if (reports.empty()) throw DomainError("no sensitivity reports to write");
    out << "variable";
    for (const auto& r : reports) {
        const std::string j = std::to_string(r.hidden);
        out << ",full_rank_J" << j << ",sample_rank_J" << j << ",std_err_diff_pct_J" << j;
    }
    out << '\n';
    const std::size_t vars = reports.front().rows.size();
    for (std::size_t v = 0; v < vars; ++v) {
        out << detail::csv_escape(reports.front().rows[v].variable);
        for (const auto& r : reports) {
            const auto& row = r.rows.at(v);
            out << ',' << row.full_rank << ',' << row.sample_rank << ',' << detail::format_fixed(row.std_err_diff_pct, 2);
        }
        out << '\n';
    }
}

inline void write_sensitivity_csv(const std::vector<SensitivityReport>& reports, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write '" + path + "'");
    write_sensitivity_csv(reports, out);
}

}  // namespace choicerbm
