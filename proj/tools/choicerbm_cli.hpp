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

#include <choicerbm/choicerbm.hpp>

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace choicerbm::cli {

/// Flags validated after parsing but before any computation.
class UsageError : public Error {
public:
    using Error::Error;
};

struct DataOptions {
    std::string path;
    std::string choice_column = "choice";
    std::vector<std::string> features;
    int alternatives = 0;
    std::vector<std::string> alternative_names;
};

inline void add_data_options(CLI::App* cmd, DataOptions& o, bool required = true) {
    auto* data = cmd->add_option("--data", o.path, "Choice table (CSV with header)")->check(CLI::ExistingFile);
    if (required) data->required();
    cmd->add_option("--choice-col", o.choice_column, "Column holding the 1-based chosen alternative");
    cmd->add_option("--features", o.features, "Feature columns (default: every other column)")->delimiter(',');
    cmd->add_option("--alternatives", o.alternatives, "Number of alternatives I (default: largest choice)")
        ->check(CLI::NonNegativeNumber);
    cmd->add_option("--alternative-names", o.alternative_names, "Names of the alternatives")->delimiter(',');
}

inline void add_train_options(CLI::App* cmd, TrainConfig& cfg) {
    cmd->add_option("--epochs", cfg.epochs, "Training epochs")->check(CLI::PositiveNumber);
    cmd->add_option("--batch", cfg.batch_size, "Minibatch size")->check(CLI::PositiveNumber);
    cmd->add_option("--lr", cfg.learning_rate, "Base learning rate")->check(CLI::NonNegativeNumber);
    cmd->add_option("--cd-k", cfg.cd_k, "Gibbs steps per contrastive-divergence update")->check(CLI::PositiveNumber);
    cmd->add_option("--seed", cfg.seed, "Random seed");
    cmd->add_option("--momentum-initial", cfg.momentum_initial, "Momentum for the first epochs")
        ->check(CLI::Range(0.0, 0.999999));
    cmd->add_option("--momentum-final", cfg.momentum_final, "Momentum after the switch")
        ->check(CLI::Range(0.0, 0.999999));
    cmd->add_option("--momentum-switch", cfg.momentum_switch_epoch, "Epochs run at the initial momentum")
        ->check(CLI::NonNegativeNumber);
    cmd->add_option("--patience", cfg.early_stop_patience, "Early-stopping patience in epochs (0 = off)")
        ->check(CLI::NonNegativeNumber);
    cmd->add_option("--init-scale", cfg.weight_init_scale, "Std of the initial weights")->check(CLI::PositiveNumber);
    cmd->add_flag("--lr-decay", cfg.lr_decay, "Divide the learning rate by (1 + epoch)");
    cmd->add_option("--weight-decay", cfg.weight_decay, "L2 penalty on D, B, A")->check(CLI::NonNegativeNumber);
}

inline ChoiceDataset load_raw(const DataOptions& o) {
    return load_csv_raw(o.path, o.choice_column, o.features, o.alternatives, o.alternative_names);
}

/// Raw table -> seeded split -> z-scores fitted on the training part.
struct PreparedData {
    ChoiceDataset train;
    ChoiceDataset valid;
};

inline PreparedData prepare(const ChoiceDataset& raw, double fraction, std::uint64_t seed) {
    auto [tr_raw, va_raw] = split(raw, SplitSpec{fraction, 2, seed});
    const NormStats stats = fit_norm_stats(tr_raw.x());
    for (std::size_t k = 0; k < stats.constant.size(); ++k) {
        if (stats.constant[k]) warn("feature '" + raw.feature_names()[k] + "' is constant; left at 0");
    }
    return {apply_normalization(tr_raw, stats), apply_normalization(va_raw, stats)};
}

inline std::vector<std::pair<std::string, double>> report_metrics(const FitReport& r, int best_epoch) {
    return {{"validation_error", r.validation_error},
            {"mean_true_probability", r.mean_true_probability},
            {"loglik_train", r.loglik_train},
            {"loglik_valid", r.loglik_valid},
            {"rho2", r.rho2},
            {"bic", r.bic},
            {"n_params", static_cast<double>(r.n_params)},
            {"n_train", static_cast<double>(r.n_train)},
            {"best_epoch", static_cast<double>(best_epoch)}};
}

/// Out-of-range training settings are usage errors.
inline void check_config(const TrainConfig& cfg) {
    try {
        cfg.validate();
    } catch (const DomainError& e) {
        throw UsageError(e.what());
    }
}

inline void write_trace_csv(const TrainTrace& trace, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write '" + path + "'");
    out << "epoch,train_nll,train_loglik,valid_error,valid_loglik,reconstruction_error\n";
    for (const auto& e : trace.epochs) {
        out << e.epoch << ',' << detail::format_double(e.train_nll) << ',' << detail::format_double(e.train_loglik)
            << ',' << detail::format_double(e.valid_error) << ',' << detail::format_double(e.valid_loglik) << ','
            << detail::format_double(e.reconstruction_error) << '\n';
    }
}

inline int cmd_train(const DataOptions& data, const TrainConfig& cfg, int hidden, double fraction,
                     const std::string& out_path, const std::string& trace_path, int folds, bool tstats,
                     std::ostream& out) {
    const ChoiceDataset raw = load_raw(data);
    const PreparedData prep = prepare(raw, fraction, cfg.seed);
    const TrainResult fit = hidden == 0 ? train_mnl(prep.train, prep.valid, cfg)
                                        : train_crbm(prep.train, prep.valid, hidden, cfg);
    const FitReport report = make_fit_report(fit.params, prep.train, prep.valid, tstats);

    out << fit_table_header() << '\n' << fit_table_row(report) << '\n';
    out << "best_epoch " << fit.trace.best_epoch << " of " << fit.trace.epochs.size()
        << (fit.trace.stopped_early ? " (early stop)" : "") << '\n';

    if (folds >= 2) {
        const auto errors = cross_validate(raw, folds, hidden, cfg, cfg.seed);
        out << "cross_validation";
        for (double e : errors) out << ' ' << detail::format_fixed(e, 4);
        out << '\n';
    }
    if (!trace_path.empty()) write_trace_csv(fit.trace, trace_path);
    if (!out_path.empty()) {
        ModelMeta meta;
        meta.feature_names = prep.train.feature_names();
        meta.alternative_names = prep.train.alternative_names();
        meta.choice_column = data.choice_column;
        meta.norm = prep.train.norm_stats();
        meta.config = cfg;
        meta.split_fraction = fraction;
        meta.split_seed = cfg.seed;
        meta.metrics = report_metrics(report, fit.trace.best_epoch);
        if (report.significance) meta.std_errs = report.significance->std_errs;
        save_model(out_path, fit.params, meta);
    }
    return 0;
}

/// Re-reads a table with the columns and scaling stored in a model.
inline ChoiceDataset load_for_model(const ModelFile& mf, const std::string& path) {
    return load_csv_raw(path, mf.meta.choice_column, mf.meta.feature_names,
                        static_cast<int>(mf.params.alternatives()), mf.meta.alternative_names);
}

inline int cmd_evaluate(const std::string& model_path, const std::string& data_path, bool whole, std::ostream& out) {
    const ModelFile mf = load_model(model_path);
    const ChoiceDataset raw = load_for_model(mf, data_path);
    std::optional<PreparedData> prep;
    if (whole) {
        const ChoiceDataset all = apply_normalization(raw, mf.meta.norm);
        prep.emplace(PreparedData{all, all});
    } else {
        auto [tr, va] = split(raw, SplitSpec{mf.meta.split_fraction, 2, mf.meta.split_seed});
        prep.emplace(PreparedData{apply_normalization(tr, mf.meta.norm), apply_normalization(va, mf.meta.norm)});
    }
    const FitReport report = make_fit_report(mf.params, prep->train, prep->valid, false);
    out << fit_table_header() << '\n' << fit_table_row(report) << '\n';
    print_fit_report(out, report, mf.meta.alternative_names);
    return 0;
}

inline int cmd_predict(const std::string& model_path, const std::string& data_path, const std::string& out_path,
                       int mc_draws, std::uint64_t seed, std::ostream& out) {
    const ModelFile mf = load_model(model_path);
    const auto table = detail::read_csv(data_path);
    const Eigen::MatrixXd raw_x = read_feature_columns(table, mf.meta.feature_names, data_path);
    if (raw_x.rows() == 0) throw DomainError(data_path + ": no data rows");
    // Choices are not needed for prediction; a placeholder column keeps the
    // dataset type's invariants.
    const ChoiceDataset raw(raw_x, std::vector<int>(static_cast<std::size_t>(raw_x.rows()), 0),
                            static_cast<int>(mf.params.alternatives()), mf.meta.feature_names,
                            mf.meta.alternative_names);
    const ChoiceDataset ds = apply_normalization(raw, mf.meta.norm);
    BatchPrediction preds = predict_batch(mf.params, ds);
    if (mc_draws > 0) {
        Rng rng(seed);
        for (Eigen::Index n = 0; n < ds.rows(); ++n) {
            preds.rows[static_cast<std::size_t>(n)] = predict_mc(mf.params, ds.x().row(n).transpose(), mc_draws, rng);
        }
    }
    write_predictions_csv(preds, mf.meta.alternative_names, mf.params.hidden(), out_path);
    out << "wrote " << preds.rows.size() << " predictions to " << out_path << '\n';
    return 0;
}

inline int cmd_sensitivity(DataOptions data, TrainConfig cfg, std::vector<int> hidden, double fraction,
                           int replicates, const std::string& model_config, const std::string& out_path,
                           bool hidden_given, std::ostream& out) {
    if (!model_config.empty()) {
        const ModelFile mf = load_model(model_config);
        cfg = mf.meta.config;
        data.choice_column = mf.meta.choice_column;
        data.features = mf.meta.feature_names;
        data.alternatives = static_cast<int>(mf.params.alternatives());
        data.alternative_names = mf.meta.alternative_names;
        if (!hidden_given) hidden = {static_cast<int>(mf.params.hidden())};
    }
    const ChoiceDataset ds = normalize(load_raw(data));
    std::vector<SensitivityReport> reports;
    for (int j : hidden) {
        reports.push_back(sensitivity_run(ds, j, cfg, fraction, replicates, cfg.seed));
        out << "J=" << j << " spearman " << detail::format_fixed(reports.back().spearman, 4) << " (n="
            << reports.back().full_rows << ", n_s=" << reports.back().sample_rows << ")\n";
    }
    if (!out_path.empty()) {
        write_sensitivity_csv(reports, out_path);
    } else {
        write_sensitivity_csv(reports, out);
    }
    return 0;
}

inline int cmd_hinton(const std::string& model_path, const std::string& block_name, const std::string& out_path,
                      bool with_bias, double cell, double threshold, const std::string& data_path, std::ostream& out) {
    const ModelFile mf = load_model(model_path);
    const HintonBlock block = block_name == "B" ? HintonBlock::B : block_name == "D" ? HintonBlock::D : HintonBlock::A;
    std::optional<CrbmParams> tstats;
    if (!data_path.empty()) {
        const ChoiceDataset raw = load_for_model(mf, data_path);
        auto [tr, va] = split(raw, SplitSpec{mf.meta.split_fraction, 2, mf.meta.split_seed});
        tstats = t_statistics(mf.params, apply_normalization(tr, mf.meta.norm)).tstats;
    } else if (mf.meta.std_errs) {
        const CrbmParams& se = *mf.meta.std_errs;
        auto ratio = [](double theta, double s) { return s > 0.0 ? theta / s : 0.0; };
        CrbmParams t = mf.params;
        t.B = mf.params.B.binaryExpr(se.B, ratio);
        t.D = mf.params.D.binaryExpr(se.D, ratio);
        t.A = mf.params.A.binaryExpr(se.A, ratio);
        t.c = mf.params.c.binaryExpr(se.c, ratio);
        t.d = mf.params.d.binaryExpr(se.d, ratio);
        tstats = t;
    }
    HintonSpec spec = hinton_for_block(mf.params, block, mf.meta.feature_names, mf.meta.alternative_names, tstats,
                                       with_bias);
    spec.cell = cell;
    spec.threshold = threshold;
    std::ofstream f(out_path, std::ios::binary);
    if (!f) throw Error("cannot write '" + out_path + "'");
    f << hinton_svg(spec);
    out << "wrote " << out_path << (tstats ? "" : " (no standard errors: no significance outlines)") << '\n';
    return 0;
}

inline int cmd_generate(const std::string& planted_path, std::optional<long long> rows,
                        std::optional<std::uint64_t> seed, const std::string& out_path, std::ostream& out) {
    oracle::PlantedModel pm = oracle::read_planted_csv(planted_path);
    if (rows) pm.rows = static_cast<Eigen::Index>(*rows);
    if (seed) pm.seed = *seed;
    const ChoiceDataset ds = oracle::generate(pm);
    write_csv(ds, out_path);
    out << "wrote " << ds.rows() << " rows to " << out_path << '\n';
    return 0;
}

/// Parses argv and runs one subcommand. Returns 0 on success, 2 on usage
/// errors, 1 on runtime failures.
inline int run(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
    CLI::App app{"Discrete choice estimation with conditional restricted Boltzmann machines", "choicerbm"};
    app.require_subcommand(1);
    app.set_help_all_flag("--help-all", "Show help for every subcommand");

    // train
    DataOptions train_data;
    TrainConfig train_cfg;
    int train_hidden = 2;
    double train_split = 0.70;
    std::string train_out, train_trace;
    int train_folds = 0;
    bool no_tstats = false;
    auto* train = app.add_subcommand("train", "Fit a C-RBM (--hidden > 0) or the MNL baseline (--hidden 0)");
    add_data_options(train, train_data);
    add_train_options(train, train_cfg);
    train->add_option("--hidden", train_hidden, "Latent units J (0 = multinomial logit)")->check(CLI::NonNegativeNumber);
    train->add_option("--split", train_split, "Training fraction")->check(CLI::Range(1e-9, 1.0 - 1e-9));
    train->add_option("--out", train_out, "Model file to write");
    train->add_option("--trace", train_trace, "Per-epoch trace CSV to write");
    train->add_option("--folds", train_folds, "Also run k-fold cross-validation (k >= 2)")->check(CLI::NonNegativeNumber);
    train->add_flag("--no-tstats", no_tstats, "Skip standard errors");

    // evaluate
    std::string eval_model, eval_data;
    bool eval_all = false;
    auto* evaluate = app.add_subcommand("evaluate", "Recompute fit statistics of a saved model");
    evaluate->add_option("--model", eval_model, "Model file")->required()->check(CLI::ExistingFile);
    evaluate->add_option("--data", eval_data, "Choice table")->required()->check(CLI::ExistingFile);
    evaluate->add_flag("--all", eval_all, "Score every row instead of re-creating the training split");

    // predict
    std::string pred_model, pred_data, pred_out;
    int pred_draws = 0;
    std::uint64_t pred_seed = 0;
    auto* predict_cmd = app.add_subcommand("predict", "Write choice probabilities and latent activations");
    predict_cmd->add_option("--model", pred_model, "Model file")->required()->check(CLI::ExistingFile);
    predict_cmd->add_option("--data", pred_data, "Table with the model's feature columns")->required()->check(CLI::ExistingFile);
    predict_cmd->add_option("--out", pred_out, "Predictions CSV")->required();
    predict_cmd->add_option("--mc-draws", pred_draws, "Average over sampled hidden states instead of mean field")
        ->check(CLI::NonNegativeNumber);
    predict_cmd->add_option("--seed", pred_seed, "Seed for --mc-draws");

    // sensitivity
    DataOptions sens_data;
    TrainConfig sens_cfg;
    std::vector<int> sens_hidden{2};
    double sens_fraction = 0.1;
    int sens_replicates = 5;
    std::string sens_model, sens_out;
    auto* sens = app.add_subcommand("sensitivity", "Rank variables by standard error on full data and subsamples");
    add_data_options(sens, sens_data);
    add_train_options(sens, sens_cfg);
    auto* sens_hidden_opt =
        sens->add_option("--hidden", sens_hidden, "Latent units; a list gives one column group each")->delimiter(',');
    sens->add_option("--fraction", sens_fraction, "Subsample fraction")->check(CLI::Range(1e-9, 1.0));
    sens->add_option("--replicates", sens_replicates, "Independent subsamples")->check(CLI::PositiveNumber);
    sens->add_option("--model-config", sens_model, "Reuse columns and training config of a saved model")
        ->check(CLI::ExistingFile);
    sens->add_option("--out", sens_out, "Sensitivity CSV (default: stdout)");

    // hinton
    std::string hin_model, hin_block = "B", hin_out, hin_data;
    bool hin_bias = false;
    double hin_cell = 20.0, hin_threshold = kSignificanceThreshold;
    auto* hinton = app.add_subcommand("hinton", "Render a parameter block as an SVG Hinton diagram");
    hinton->add_option("--model", hin_model, "Model file")->required()->check(CLI::ExistingFile);
    hinton->add_option("--block", hin_block, "Parameter block")->check(CLI::IsMember({"B", "D", "A"}));
    hinton->add_option("--out", hin_out, "SVG file")->required();
    hinton->add_flag("--bias", hin_bias, "Append the bias vector as a column");
    hinton->add_option("--cell", hin_cell, "Cell size in px")->check(CLI::PositiveNumber);
    hinton->add_option("--threshold", hin_threshold, "|t| marking significance")->check(CLI::NonNegativeNumber);
    hinton->add_option("--data", hin_data, "Recompute t-statistics on the model's training split")
        ->check(CLI::ExistingFile);

    // generate
    std::string gen_planted, gen_out;
    std::optional<long long> gen_rows;
    std::optional<std::uint64_t> gen_seed;
    auto* generate_cmd = app.add_subcommand("generate", "Sample a dataset from a planted model");
    generate_cmd->add_option("--planted", gen_planted, "Planted model CSV")->required()->check(CLI::ExistingFile);
    generate_cmd->add_option("--n", gen_rows, "Rows (overrides the planted file)")->check(CLI::PositiveNumber);
    generate_cmd->add_option("--seed", gen_seed, "Seed (overrides the planted file)");
    generate_cmd->add_option("--out", gen_out, "Dataset CSV")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e, out, err);
        err << "error: " << e.what() << '\n';
        return 2;
    }

    try {
        if (*train) {
            check_config(train_cfg);
            if (train_folds == 1) throw UsageError("--folds needs at least 2");
            return cmd_train(train_data, train_cfg, train_hidden, train_split, train_out, train_trace, train_folds,
                             !no_tstats, out);
        }
        if (*evaluate) return cmd_evaluate(eval_model, eval_data, eval_all, out);
        if (*predict_cmd) return cmd_predict(pred_model, pred_data, pred_out, pred_draws, pred_seed, out);
        if (*sens) {
            check_config(sens_cfg);
            for (int j : sens_hidden)
                if (j < 0) throw UsageError("--hidden must be >= 0");
            return cmd_sensitivity(sens_data, sens_cfg, sens_hidden, sens_fraction, sens_replicates, sens_model,
                                   sens_out, sens_hidden_opt->count() > 0, out);
        }
        if (*hinton) return cmd_hinton(hin_model, hin_block, hin_out, hin_bias, hin_cell, hin_threshold, hin_data, out);
        if (*generate_cmd) return cmd_generate(gen_planted, gen_rows, gen_seed, gen_out, out);
    } catch (const UsageError& e) {
        err << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return 1;
    }
    return 2;
}

}  // namespace choicerbm::cli
