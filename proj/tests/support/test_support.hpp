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

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <unistd.h>

namespace choicerbm::testing {

/// Random parameters with entries ~ Normal(0, scale^2).
inline CrbmParams random_params(Index I, Index J, Index K, Rng& rng, double scale = 1.0) {
    CrbmParams p = CrbmParams::zeros(I, J, K);
    for_each_block(p, [&](const char*, auto& m) {
        for (Index k = 0; k < m.size(); ++k) m.data()[k] = scale * detail::standard_normal(rng);
    });
    return p;
}

inline VectorXd random_vector(Index n, Rng& rng, double scale = 1.0) {
    VectorXd v(n);
    for (Index k = 0; k < n; ++k) v(k) = scale * detail::standard_normal(rng);
    return v;
}

/// Dataset drawn from a model's exact conditional with standard normal x.
inline ChoiceDataset sample_dataset(const CrbmParams& p, Index rows, std::uint64_t seed) {
    oracle::PlantedModel pm;
    pm.params = p;
    pm.context.assign(static_cast<std::size_t>(p.features()), oracle::ContextColumn{});
    pm.rows = rows;
    pm.seed = seed;
    return oracle::generate(pm);
}

/// Fresh scratch directory under the system temp dir, removed on scope exit.
class TempDir {
public:
    explicit TempDir(const std::string& tag) {
        static int counter = 0;
        path_ = std::filesystem::temp_directory_path() /
                ("choicerbm_" + tag + "_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
        std::filesystem::remove_all(path_);
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    std::string file(const std::string& name) const { return (path_ / name).string(); }

private:
    std::filesystem::path path_;
};

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline void write_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    out << text;
}

/// I=5, J=2, K=6 planted model. Hidden units 1 and 2 switch on at x1 = -1
/// and x1 = 1; alternative 1 gets +3 between the switches, so alternative 2
/// wins on both sides of the band. A multinomial logit can only give each
/// alternative a convex region and loses one of the two sides.
inline oracle::PlantedModel band_model(Index rows = 50000, std::uint64_t seed = 7) {
    oracle::PlantedModel pm;
    pm.params = CrbmParams::zeros(5, 2, 6);
    auto& p = pm.params;
    p.A(0, 0) = 10.0;
    p.A(1, 0) = 10.0;
    p.d << 10.0, -10.0;
    p.D(0, 0) = 3.0;
    p.D(0, 1) = -3.0;
    p.c << 0.0, 1.2, -1.0, -1.0, -1.0;
    p.B(2, 1) = 0.8;
    p.B(3, 2) = 0.8;
    p.B(4, 3) = -0.8;
    pm.context.assign(6, oracle::ContextColumn{});
    pm.rows = rows;
    pm.seed = seed;
    return pm;
}

/// Training settings under which the hidden units leave the symmetric
/// starting point within the epoch budget on band_model data.
inline TrainConfig band_config() {
    TrainConfig cfg;
    cfg.learning_rate = 1e-2;
    cfg.weight_init_scale = 0.1;
    cfg.epochs = 200;
    cfg.early_stop_patience = 0;
    return cfg;
}

}  // namespace choicerbm::testing
