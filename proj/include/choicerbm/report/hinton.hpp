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
#include "../model.hpp"
#include "../stats.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace choicerbm {

/// Input for a Hinton diagram: one square patch per matrix entry.
struct HintonSpec {
    MatrixXd values;
    std::vector<std::string> row_labels;
    std::vector<std::string> col_labels;
    std::optional<MatrixXd> tstats;  // same shape as values
    double threshold = kSignificanceThreshold;
    double cell = 20.0;  // px
    std::string title;
};

namespace detail {

inline std::string xml_escape(const std::string& s) {
    std::string out;
    for (char ch : s) {
        switch (ch) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            default: out.push_back(ch);
        }
    }
    return out;
}

inline std::string px(double v) { return format_fixed(v, 2); }

}  // namespace detail

/// Side of the patch for `value`: cell * sqrt(|value| / max_abs), so patch
/// area is proportional to |value|.
inline double hinton_patch_side(double value, double max_abs, double cell) {
    if (max_abs <= 0.0) return 0.0;
    return cell * std::sqrt(std::abs(value) / max_abs);
}

/// Renders an SVG 1.1 Hinton diagram. White patches are positive, black
/// negative, and patches with |t| >= threshold get a blue outline. Zero
/// entries draw nothing. Output depends only on the spec.
inline std::string hinton_svg(const HintonSpec& spec) {
    const Index rows = spec.values.rows(), cols = spec.values.cols();
    if (static_cast<Index>(spec.row_labels.size()) != rows || static_cast<Index>(spec.col_labels.size()) != cols) {
        throw DimensionError("Hinton labels do not match the matrix shape");
    }
    if (spec.tstats && (spec.tstats->rows() != rows || spec.tstats->cols() != cols)) {
        throw DimensionError("Hinton t-statistics do not match the matrix shape");
    }
    if (!(spec.cell > 0.0)) throw DomainError("Hinton cell size must be positive");
    if (!spec.values.allFinite()) throw DomainError("Hinton matrix has non-finite entries");

    std::size_t row_chars = 0, col_chars = 0;
    for (const auto& s : spec.row_labels) row_chars = std::max(row_chars, s.size());
    for (const auto& s : spec.col_labels) col_chars = std::max(col_chars, s.size());
    const double cell = spec.cell;
    const double left = 10.0 + 7.0 * static_cast<double>(row_chars);
    const double top = 10.0 + 7.0 * static_cast<double>(col_chars) + (spec.title.empty() ? 0.0 : 20.0);
    const double width = left + cell * static_cast<double>(cols) + 10.0;
    const double height = top + cell * static_cast<double>(rows) + 10.0;
    const double max_abs = rows * cols > 0 ? spec.values.cwiseAbs().maxCoeff() : 0.0;
    const double font = std::max(8.0, std::min(12.0, cell * 0.6));

    std::ostringstream out;
    out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" << detail::px(width)
        << "\" height=\"" << detail::px(height) << "\" viewBox=\"0 0 " << detail::px(width) << ' '
        << detail::px(height) << "\">\n";
    if (!spec.title.empty()) {
        out << "<text x=\"" << detail::px(left) << "\" y=\"16.00\" font-family=\"sans-serif\" font-size=\"14\">"
            << detail::xml_escape(spec.title) << "</text>\n";
    }
    out << "<rect class=\"background\" x=\"" << detail::px(left) << "\" y=\"" << detail::px(top) << "\" width=\""
        << detail::px(cell * cols) << "\" height=\"" << detail::px(cell * rows) << "\" fill=\"#808080\"/>\n";
    for (Index r = 0; r < rows; ++r) {
        out << "<text class=\"row-label\" x=\"" << detail::px(left - 4.0) << "\" y=\""
            << detail::px(top + cell * (r + 0.5) + font * 0.35) << "\" font-family=\"sans-serif\" font-size=\""
            << detail::px(font) << "\" text-anchor=\"end\">" << detail::xml_escape(spec.row_labels[static_cast<std::size_t>(r)])
            << "</text>\n";
    }
    for (Index c = 0; c < cols; ++c) {
        const double x = left + cell * (c + 0.5) + font * 0.35;
        const double y = top - 4.0;
        out << "<text class=\"col-label\" x=\"" << detail::px(x) << "\" y=\"" << detail::px(y)
            << "\" font-family=\"sans-serif\" font-size=\"" << detail::px(font) << "\" transform=\"rotate(-90 "
            << detail::px(x) << ' ' << detail::px(y) << ")\">" << detail::xml_escape(spec.col_labels[static_cast<std::size_t>(c)])
            << "</text>\n";
    }
    for (Index r = 0; r < rows; ++r) {
        for (Index c = 0; c < cols; ++c) {
            const double v = spec.values(r, c);
            const double side = hinton_patch_side(v, max_abs, cell);
            if (side <= 0.0) continue;
            const bool sig = spec.tstats && significant((*spec.tstats)(r, c), spec.threshold);
            const double x = left + cell * c + (cell - side) / 2.0;
            const double y = top + cell * r + (cell - side) / 2.0;
            out << "<rect class=\"patch " << (v > 0 ? "pos" : "neg") << (sig ? " sig" : "") << "\" data-row=\"" << r
                << "\" data-col=\"" << c << "\" x=\"" << detail::px(x) << "\" y=\"" << detail::px(y) << "\" width=\""
                << detail::px(side) << "\" height=\"" << detail::px(side) << "\" fill=\""
                << (v > 0 ? "#ffffff" : "#000000") << '"';
            if (sig) out << " stroke=\"#0000ff\" stroke-width=\"2\"";
            out << "/>\n";
        }
    }
    out << "</svg>\n";
    return out.str();
}

/// Which parameter block to draw.
enum class HintonBlock { B, D, A };

/// Builds a spec for one block; with `with_bias` the matching bias vector
/// (c for B and D, d for A) is appended as a final "bias" column.
inline HintonSpec hinton_for_block(const CrbmParams& p, HintonBlock block,
                                   const std::vector<std::string>& feature_names,
                                   const std::vector<std::string>& alternative_names,
                                   const std::optional<CrbmParams>& tstats, bool with_bias) {
    HintonSpec spec;
    std::vector<std::string> hidden_names;
    for (Index j = 0; j < p.hidden(); ++j) hidden_names.push_back("hidden" + std::to_string(j + 1));
    auto pick = [&](const CrbmParams& q) -> MatrixXd {
        const MatrixXd& m = block == HintonBlock::B ? q.B : block == HintonBlock::D ? q.D : q.A;
        if (!with_bias) return m;
        const VectorXd& bias = block == HintonBlock::A ? q.d : q.c;
        MatrixXd out(m.rows(), m.cols() + 1);
        out.leftCols(m.cols()) = m;
        out.col(m.cols()) = bias;
        return out;
    };
    spec.values = pick(p);
    if (tstats) spec.tstats = pick(*tstats);
    spec.row_labels = block == HintonBlock::A ? hidden_names : alternative_names;
    spec.col_labels = block == HintonBlock::D ? hidden_names : feature_names;
    if (with_bias) spec.col_labels.push_back("bias");
    spec.title = block == HintonBlock::B ? "B" : block == HintonBlock::D ? "D" : "A";
    return spec;
}

}  // namespace choicerbm
