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

#include "../dataset.hpp"
#include "../detail/text.hpp"
#include "../error.hpp"
#include "../model.hpp"
#include "../trainer.hpp"

#include <cstdint>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

// Model file, format version 1. Line oriented text:
//
//   choicerbm-model 1
//   alternatives <I>            followed by I name lines
//   features <K>                followed by K name lines
//   hidden <J>
//   choice_column <name>
//   norm_mean <K numbers>
//   norm_std <K numbers>
//   norm_constant <K 0/1 flags>
//   split <train fraction> <seed>
//   config <key> <value>        one line per TrainConfig field
//   metric <key> <value>        zero or more
//   block <name> <rows> <cols>  followed by <rows> lines of <cols> numbers;
//                               D, B, A, c, d always, se_* blocks optional
//   end
//
// Numbers use the shortest decimal form that reads back to the same double,
// so write -> read -> write is byte-identical.

namespace choicerbm {

inline constexpr int kModelFormatVersion = 1;

struct ModelMeta {
    std::vector<std::string> feature_names;
    std::vector<std::string> alternative_names;
    std::string choice_column = "choice";
    NormStats norm;
    TrainConfig config;
    double split_fraction = 0.70;
    std::uint64_t split_seed = 0;
    std::vector<std::pair<std::string, double>> metrics;
    std::optional<CrbmParams> std_errs;

    std::optional<double> metric(const std::string& key) const {
        for (const auto& [k, v] : metrics)
            if (k == key) return v;
        return std::nullopt;
    }
};

struct ModelFile {
    CrbmParams params;
    ModelMeta meta;
};

namespace detail {

inline void write_numbers(std::ostream& out, const auto& values) {
    for (Index i = 0; i < values.size(); ++i) out << ' ' << format_double(values(i));
}

inline void write_block(std::ostream& out, const std::string& name, const MatrixXd& m) {
    out << "block " << name << ' ' << m.rows() << ' ' << m.cols() << '\n';
    for (Index r = 0; r < m.rows(); ++r) {
        for (Index c = 0; c < m.cols(); ++c) out << (c ? " " : "") << format_double(m(r, c));
        out << '\n';
    }
}

inline std::vector<std::pair<std::string, std::string>> config_fields(const TrainConfig& c) {
    return {{"cd_k", std::to_string(c.cd_k)},
            {"batch_size", std::to_string(c.batch_size)},
            {"epochs", std::to_string(c.epochs)},
            {"learning_rate", format_double(c.learning_rate)},
            {"momentum_initial", format_double(c.momentum_initial)},
            {"momentum_final", format_double(c.momentum_final)},
            {"momentum_switch_epoch", std::to_string(c.momentum_switch_epoch)},
            {"seed", std::to_string(c.seed)},
            {"early_stop_patience", std::to_string(c.early_stop_patience)},
            {"weight_init_scale", format_double(c.weight_init_scale)},
            {"lr_decay", c.lr_decay ? "1" : "0"},
            {"weight_decay", format_double(c.weight_decay)},
            {"init_bias_from_shares", c.init_bias_from_shares ? "1" : "0"}};
}

/// Sequential reader over the lines of a model file.
class ModelReader {
public:
    explicit ModelReader(const std::string& text) : in_(text) {}

    std::vector<std::string> tokens(const char* expect_key = nullptr) {
        std::string line = next_line();
        std::vector<std::string> out;
        std::istringstream ss(line);
        for (std::string t; ss >> t;) out.push_back(t);
        if (expect_key && (out.empty() || out[0] != expect_key)) {
            fail(std::string("expected '") + expect_key + "'");
        }
        return out;
    }

    std::string next_line() {
        std::string line;
        if (!std::getline(in_, line)) fail("unexpected end of file (truncated?)");
        ++line_no_;
        return line;
    }

    std::string peek_key() {
        const auto pos = in_.tellg();
        std::string line;
        if (!std::getline(in_, line)) return {};
        in_.seekg(pos);
        std::istringstream ss(line);
        std::string key;
        ss >> key;
        return key;
    }

    [[noreturn]] void fail(const std::string& what) const {
        throw ModelFileError("model file line " + std::to_string(line_no_) + ": " + what);
    }

    double number(const std::string& s) const {
        auto v = parse_double(s);
        if (!v) fail("bad number '" + s + "'");
        return *v;
    }

    long long integer(const std::string& s, long long lo, long long hi) const {
        const double v = number(s);
        if (v != std::floor(v) || v < static_cast<double>(lo) || v > static_cast<double>(hi)) {
            fail("bad integer '" + s + "'");
        }
        return static_cast<long long>(v);
    }

    std::uint64_t unsigned_integer(const std::string& s) const {
        std::uint64_t v = 0;
        auto res = std::from_chars(s.data(), s.data() + s.size(), v);
        if (res.ec != std::errc() || res.ptr != s.data() + s.size()) fail("bad unsigned integer '" + s + "'");
        return v;
    }

    VectorXd numbers(const std::vector<std::string>& toks, std::size_t skip, Index expect) const {
        if (static_cast<Index>(toks.size() - skip) != expect) {
            fail("expected " + std::to_string(expect) + " values, found " + std::to_string(toks.size() - skip));
        }
        VectorXd v(expect);
        for (Index i = 0; i < expect; ++i) v(i) = number(toks[skip + static_cast<std::size_t>(i)]);
        return v;
    }

    MatrixXd block(const std::string& name, Index rows, Index cols) {
        auto head = tokens("block");
        if (head.size() != 4 || head[1] != name) fail("expected block " + name);
        if (integer(head[2], 0, 1 << 24) != rows || integer(head[3], 0, 1 << 24) != cols) {
            fail("block " + name + " has dimensions " + head[2] + "x" + head[3] + ", expected " +
                 std::to_string(rows) + "x" + std::to_string(cols));
        }
        MatrixXd m(rows, cols);
        for (Index r = 0; r < rows; ++r) {
            std::istringstream ss(next_line());
            std::vector<std::string> toks;
            for (std::string t; ss >> t;) toks.push_back(t);
            m.row(r) = numbers(toks, 0, cols).transpose();
        }
        return m;
    }

private:
    std::istringstream in_;
    int line_no_ = 0;
};

}  // namespace detail

inline std::string serialize_model(const CrbmParams& p, const ModelMeta& meta) {
    p.validate();
    const Index I = p.alternatives(), J = p.hidden(), K = p.features();
    if (static_cast<Index>(meta.alternative_names.size()) != I || static_cast<Index>(meta.feature_names.size()) != K ||
        meta.norm.size() != K) {
        throw DimensionError("model metadata does not match parameter dimensions");
    }
    std::ostringstream out;
    out << "choicerbm-model " << kModelFormatVersion << '\n';
    out << "alternatives " << I << '\n';
    for (const auto& n : meta.alternative_names) out << n << '\n';
    out << "features " << K << '\n';
    for (const auto& n : meta.feature_names) out << n << '\n';
    out << "hidden " << J << '\n';
    out << "choice_column " << meta.choice_column << '\n';
    out << "norm_mean";
    detail::write_numbers(out, meta.norm.mean);
    out << "\nnorm_std";
    detail::write_numbers(out, meta.norm.std);
    out << "\nnorm_constant";
    for (bool b : meta.norm.constant) out << (b ? " 1" : " 0");
    out << "\nsplit " << detail::format_double(meta.split_fraction) << ' ' << meta.split_seed << '\n';
    for (const auto& [k, v] : detail::config_fields(meta.config)) out << "config " << k << ' ' << v << '\n';
    for (const auto& [k, v] : meta.metrics) out << "metric " << k << ' ' << detail::format_double(v) << '\n';
    detail::write_block(out, "D", p.D);
    detail::write_block(out, "B", p.B);
    detail::write_block(out, "A", p.A);
    detail::write_block(out, "c", p.c);
    detail::write_block(out, "d", p.d);
    if (meta.std_errs) {
        detail::write_block(out, "se_D", meta.std_errs->D);
        detail::write_block(out, "se_B", meta.std_errs->B);
        detail::write_block(out, "se_A", meta.std_errs->A);
        detail::write_block(out, "se_c", meta.std_errs->c);
        detail::write_block(out, "se_d", meta.std_errs->d);
    }
    out << "end\n";
    return out.str();
}

/// Parses a model file; nothing is returned unless the whole file is valid.
inline ModelFile parse_model(const std::string& text) {
    detail::ModelReader rd(text);
    auto head = rd.tokens("choicerbm-model");
    if (head.size() != 2) rd.fail("malformed header");
    if (rd.integer(head[1], 0, 1 << 20) != kModelFormatVersion) {
        rd.fail("unsupported format version " + head[1] + " (expected " + std::to_string(kModelFormatVersion) + ")");
    }
    ModelFile mf;
    auto& meta = mf.meta;
    auto count = [&](const char* key) {
        auto t = rd.tokens(key);
        if (t.size() != 2) rd.fail(std::string("malformed '") + key + "' line");
        return static_cast<Index>(rd.integer(t[1], 0, 1 << 24));
    };
    const Index I = count("alternatives");
    if (I < 2) rd.fail("need at least two alternatives");
    for (Index i = 0; i < I; ++i) meta.alternative_names.push_back(rd.next_line());
    const Index K = count("features");
    for (Index k = 0; k < K; ++k) meta.feature_names.push_back(rd.next_line());
    const Index J = count("hidden");
    {
        auto line = rd.next_line();
        const std::string key = "choice_column ";
        if (line.rfind(key, 0) != 0) rd.fail("expected 'choice_column'");
        meta.choice_column = line.substr(key.size());
    }
    meta.norm.mean = rd.numbers(rd.tokens("norm_mean"), 1, K);
    meta.norm.std = rd.numbers(rd.tokens("norm_std"), 1, K);
    const VectorXd flags = rd.numbers(rd.tokens("norm_constant"), 1, K);
    for (Index k = 0; k < K; ++k) meta.norm.constant.push_back(flags(k) != 0.0);
    {
        auto t = rd.tokens("split");
        if (t.size() != 3) rd.fail("malformed 'split' line");
        meta.split_fraction = rd.number(t[1]);
        meta.split_seed = rd.unsigned_integer(t[2]);
    }
    auto& cfg = meta.config;
    for (const auto& [key, unused] : detail::config_fields(cfg)) {
        auto t = rd.tokens("config");
        if (t.size() != 3 || t[1] != key) rd.fail("expected config " + key);
        const std::string& v = t[2];
        if (key == "cd_k") cfg.cd_k = static_cast<int>(rd.integer(v, 1, 1 << 30));
        else if (key == "batch_size") cfg.batch_size = static_cast<int>(rd.integer(v, 1, 1 << 30));
        else if (key == "epochs") cfg.epochs = static_cast<int>(rd.integer(v, 1, 1 << 30));
        else if (key == "learning_rate") cfg.learning_rate = rd.number(v);
        else if (key == "momentum_initial") cfg.momentum_initial = rd.number(v);
        else if (key == "momentum_final") cfg.momentum_final = rd.number(v);
        else if (key == "momentum_switch_epoch") cfg.momentum_switch_epoch = static_cast<int>(rd.integer(v, 0, 1 << 30));
        else if (key == "seed") cfg.seed = rd.unsigned_integer(v);
        else if (key == "early_stop_patience") cfg.early_stop_patience = static_cast<int>(rd.integer(v, 0, 1 << 30));
        else if (key == "weight_init_scale") cfg.weight_init_scale = rd.number(v);
        else if (key == "lr_decay") cfg.lr_decay = rd.integer(v, 0, 1) == 1;
        else if (key == "weight_decay") cfg.weight_decay = rd.number(v);
        else if (key == "init_bias_from_shares") cfg.init_bias_from_shares = rd.integer(v, 0, 1) == 1;
    }
    while (rd.peek_key() == "metric") {
        auto t = rd.tokens("metric");
        if (t.size() != 3) rd.fail("malformed 'metric' line");
        meta.metrics.emplace_back(t[1], rd.number(t[2]));
    }
    auto& p = mf.params;
    p.D = rd.block("D", I, J);
    p.B = rd.block("B", I, K);
    p.A = rd.block("A", J, K);
    p.c = rd.block("c", I, 1);
    p.d = rd.block("d", J, 1);
    if (rd.peek_key() == "block") {
        CrbmParams se;
        se.D = rd.block("se_D", I, J);
        se.B = rd.block("se_B", I, K);
        se.A = rd.block("se_A", J, K);
        se.c = rd.block("se_c", I, 1);
        se.d = rd.block("se_d", J, 1);
        meta.std_errs = std::move(se);
    }
    rd.tokens("end");
    try {
        p.validate();
    } catch (const Error& e) {
        throw ModelFileError(std::string("invalid parameters: ") + e.what());
    }
    return mf;
}

inline void save_model(const std::string& path, const CrbmParams& p, const ModelMeta& meta) {
    const std::string text = serialize_model(p, meta);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write '" + path + "'");
    out << text;
    if (!out) throw Error("failed writing '" + path + "'");
}

inline ModelFile load_model(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ModelFileError("cannot open model file '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_model(ss.str());
}

}  // namespace choicerbm
