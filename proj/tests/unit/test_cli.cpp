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

#include "choicerbm_cli.hpp"
#include "test_support.hpp"

#include <gtest/gtest.h>

#include <sstream>

using namespace choicerbm;
using choicerbm::testing::read_file;
using choicerbm::testing::TempDir;
using choicerbm::testing::write_file;

namespace {

struct CliResult {
    int code;
    std::string out, err;
};

CliResult run_cli(std::vector<std::string> args) {
    args.insert(args.begin(), "choicerbm");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    const int code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
    return {code, out.str(), err.str()};
}

std::vector<std::string> lines(const std::string& text) {
    std::vector<std::string> out;
    std::istringstream in(text);
    for (std::string line; std::getline(in, line);) out.push_back(line);
    return out;
}

class CliTest : public ::testing::Test {
protected:
    void SetUp() override {
        oracle::PlantedModel pm;
        pm.params = CrbmParams::zeros(3, 1, 2);
        pm.params.B << 1.0, 0.0, -1.0, 0.5, 0.0, 0.0;
        pm.params.A << 2.0, 0.0;
        pm.params.D << 1.0, -1.0, 0.0;
        pm.context.assign(2, oracle::ContextColumn{});
        pm.context[1].mean = 5.0;
        pm.context[1].std = 2.0;
        pm.rows = 600;
        pm.seed = 11;
        oracle::write_planted_csv(pm, planted());
        ASSERT_EQ(run_cli({"generate", "--planted", planted(), "--out", data()}).code, 0);
    }
    std::string planted() const { return dir.file("planted.csv"); }
    std::string data() const { return dir.file("data.csv"); }
    std::string file(const std::string& name) const { return dir.file(name); }

    TempDir dir{"cli"};
};

}  // namespace

TEST_F(CliTest, GenerateWritesTheRequestedRows) {
    const auto table = detail::read_csv(data());
    EXPECT_EQ(table.rows.size(), 600u);
    ASSERT_EQ(run_cli({"generate", "--planted", planted(), "--out", file("small.csv"), "--n", "17", "--seed", "3"}).code, 0);
    EXPECT_EQ(detail::read_csv(file("small.csv")).rows.size(), 17u);
}

TEST_F(CliTest, EvaluateReproducesTrainingMetrics) {
    for (const char* hidden : {"0", "2"}) {
        const std::string model = file(std::string("m") + hidden + ".txt");
        const CliResult tr = run_cli({"train", "--data", data(), "--hidden", hidden, "--epochs", "15", "--out", model});
        ASSERT_EQ(tr.code, 0) << tr.err;
        const CliResult ev = run_cli({"evaluate", "--model", model, "--data", data()});
        ASSERT_EQ(ev.code, 0) << ev.err;
        const auto t = lines(tr.out), e = lines(ev.out);
        ASSERT_GE(t.size(), 2u);
        ASSERT_GE(e.size(), 2u);
        EXPECT_EQ(t[0], fit_table_header());
        EXPECT_EQ(t[1], e[1]);
        EXPECT_EQ(t[1].substr(0, 4), std::string(hidden) == "0" ? "MNL," : "CRBM");

        const ModelFile mf = load_model(model);
        EXPECT_EQ(mf.params.hidden(), std::stoi(hidden));
        const std::string expected = "validation_error " + detail::format_double(*mf.meta.metric("validation_error"));
        EXPECT_NE(ev.out.find(expected + "\n"), std::string::npos) << ev.out;
        EXPECT_NE(ev.out.find("n_train 420\n"), std::string::npos);
    }
}

TEST_F(CliTest, TrainUsesDocumentedDefaults) {
    const std::string model = file("defaults.txt");
    ASSERT_EQ(run_cli({"train", "--data", data(), "--epochs", "2", "--out", model, "--no-tstats"}).code, 0);
    const ModelFile mf = load_model(model);
    EXPECT_EQ(mf.params.hidden(), 2);
    EXPECT_EQ(mf.meta.config.batch_size, 64);
    EXPECT_EQ(mf.meta.config.learning_rate, 1e-3);
    EXPECT_EQ(mf.meta.config.cd_k, 1);
    EXPECT_EQ(mf.meta.split_fraction, 0.70);
    EXPECT_FALSE(mf.meta.std_errs.has_value());
    EXPECT_EQ(TrainConfig{}.epochs, 400);
}

TEST_F(CliTest, TraceAndCrossValidation) {
    const CliResult r = run_cli({"train", "--data", data(), "--hidden", "1", "--epochs", "4", "--folds", "3", "--trace",
                                 file("trace.csv"), "--no-tstats"});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_NE(r.out.find("cross_validation "), std::string::npos);
    EXPECT_NE(r.out.find("best_epoch "), std::string::npos);
    EXPECT_EQ(detail::read_csv(file("trace.csv")).rows.size(), 4u);
}

TEST_F(CliTest, PredictWritesNormalisedProbabilities) {
    const std::string model = file("m.txt");
    ASSERT_EQ(run_cli({"train", "--data", data(), "--hidden", "1", "--epochs", "5", "--out", model}).code, 0);
    for (const std::string draws : {"0", "20"}) {
        const CliResult r =
            run_cli({"predict", "--model", model, "--data", data(), "--out", file("pred.csv"), "--mc-draws", draws});
        ASSERT_EQ(r.code, 0) << r.err;
        const auto table = detail::read_csv(file("pred.csv"));
        ASSERT_EQ(table.rows.size(), 600u);
        EXPECT_EQ(table.header.size(), 1u + 3u + 1u + 1u);
        for (const auto& row : table.rows) {
            const double sum = *detail::parse_double(row[1]) + *detail::parse_double(row[2]) + *detail::parse_double(row[3]);
            EXPECT_NEAR(sum, 1.0, 1e-12);
        }
    }
}

TEST_F(CliTest, HintonUsesStoredStandardErrors) {
    const std::string model = file("m.txt");
    ASSERT_EQ(run_cli({"train", "--data", data(), "--hidden", "0", "--epochs", "30", "--lr", "0.01", "--out", model}).code,
              0);
    ASSERT_EQ(run_cli({"hinton", "--model", model, "--out", file("b.svg"), "--bias"}).code, 0);
    const std::string svg = read_file(file("b.svg"));
    EXPECT_EQ(svg.rfind("<?xml", 0), 0u);
    EXPECT_NE(svg.find(" sig\""), std::string::npos);
    ASSERT_EQ(run_cli({"hinton", "--model", model, "--out", file("b2.svg"), "--bias", "--data", data()}).code, 0);
    EXPECT_EQ(read_file(file("b2.svg")), svg);
}

TEST_F(CliTest, SensitivityTable) {
    const CliResult r = run_cli({"sensitivity", "--data", data(), "--hidden", "0,1", "--epochs", "3", "--fraction",
                                 "0.5", "--replicates", "2"});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_NE(r.out.find("variable,full_rank_J0,sample_rank_J0,std_err_diff_pct_J0,full_rank_J1"), std::string::npos);
    EXPECT_NE(r.out.find("\nbias,"), std::string::npos);
    EXPECT_NE(r.out.find("J=1 spearman "), std::string::npos);
}

TEST_F(CliTest, UsageErrorsExitWithTwo) {
    EXPECT_EQ(run_cli({}).code, 2);
    EXPECT_EQ(run_cli({"train", "--data", data(), "--bogus"}).code, 2);
    EXPECT_EQ(run_cli({"train"}).code, 2);
    EXPECT_EQ(run_cli({"train", "--data", file("absent.csv")}).code, 2);
    EXPECT_EQ(run_cli({"train", "--data", data(), "--epochs", "0"}).code, 2);
    EXPECT_EQ(run_cli({"train", "--data", data(), "--lr", "-1"}).code, 2);
    EXPECT_EQ(run_cli({"train", "--data", data(), "--momentum-final", "1.5"}).code, 2);
    EXPECT_EQ(run_cli({"train", "--data", data(), "--folds", "1"}).code, 2);
    EXPECT_EQ(run_cli({"hinton", "--model", data(), "--out", file("x.svg"), "--block", "Q"}).code, 2);
    const CliResult r = run_cli({"nonsense"});
    EXPECT_EQ(r.code, 2);
    EXPECT_FALSE(r.err.empty());
}

TEST_F(CliTest, RuntimeFailuresExitWithOne) {
    write_file(file("corrupt.txt"), "choicerbm-model 1\nalternatives x\n");
    const CliResult r = run_cli({"evaluate", "--model", file("corrupt.txt"), "--data", data()});
    EXPECT_EQ(r.code, 1);
    EXPECT_NE(r.err.find("model file line 2"), std::string::npos) << r.err;
    EXPECT_EQ(run_cli({"train", "--data", data(), "--features", "x1,missing"}).code, 1);
}

TEST_F(CliTest, HelpExitsWithZero) {
    const CliResult r = run_cli({"--help"});
    EXPECT_EQ(r.code, 0);
    EXPECT_NE(r.out.find("sensitivity"), std::string::npos);
}
