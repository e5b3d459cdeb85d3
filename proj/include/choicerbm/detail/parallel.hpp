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

#include <algorithm>
#include <cstdlib>
#include <string>
#include <thread>
#include <vector>

namespace choicerbm::detail {

/// Worker cap: CHOICERBM_THREADS if set and positive, else hardware cores.
inline unsigned thread_count() {
    if (const char* env = std::getenv("CHOICERBM_THREADS")) {
        try {
            const int n = std::stoi(env);
            if (n > 0) return static_cast<unsigned>(n);
        } catch (...) {
        }
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

/// Splits [0, n) into fixed chunks of `chunk` rows and calls fn(chunk_index,
/// begin, end) for each, spread over worker threads. Chunk boundaries do not
/// depend on the thread count, so callers reducing per-chunk results in
/// chunk order get bit-identical output for any CHOICERBM_THREADS.
template <typename Fn>
void for_each_chunk(std::size_t n, std::size_t chunk, Fn&& fn) {
    const std::size_t chunks = (n + chunk - 1) / chunk;
    const unsigned workers =
        static_cast<unsigned>(std::min<std::size_t>(thread_count(), chunks));
    if (workers <= 1) {
        for (std::size_t c = 0; c < chunks; ++c) fn(c, c * chunk, std::min(n, (c + 1) * chunk));
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) {
        pool.emplace_back([&, w] {
            for (std::size_t c = w; c < chunks; c += workers) {
                fn(c, c * chunk, std::min(n, (c + 1) * chunk));
            }
        });
    }
    for (auto& t : pool) t.join();
}

inline std::size_t chunk_count(std::size_t n, std::size_t chunk) { return (n + chunk - 1) / chunk; }

}  // namespace choicerbm::detail
