// Copyright 2026 The Cheshire Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef CHESHIRE_PARALLEL_HPP
#define CHESHIRE_PARALLEL_HPP

#include <algorithm>
#include <cstdint>
#include <exception>
#include <thread>
#include <vector>

namespace cheshire::detail {

/// Runs body(begin, end) over `threads` contiguous slices of [0, n). The
/// first exception thrown by a worker is rethrown after all have joined.
template <typename Body>
void parallel_for(std::uint64_t n, unsigned threads, Body body) {
    threads = std::max(1u, static_cast<unsigned>(std::min<std::uint64_t>(threads, std::max<std::uint64_t>(n, 1))));
    if (threads == 1) {
        body(std::uint64_t{0}, n);
        return;
    }
    std::vector<std::thread> workers;
    std::vector<std::exception_ptr> errors(threads);
    const std::uint64_t chunk = (n + threads - 1) / threads;
    for (unsigned t = 0; t < threads; ++t) {
        const std::uint64_t begin = std::min(n, t * chunk);
        const std::uint64_t end = std::min(n, begin + chunk);
        workers.emplace_back([&, t, begin, end] {
            try {
                body(begin, end);
            } catch (...) {
                errors[t] = std::current_exception();
            }
        });
    }
    for (auto &w : workers) {
        w.join();
    }
    for (const auto &e : errors) {
        if (e) {
            std::rethrow_exception(e);
        }
    }
}

}  // namespace cheshire::detail

#endif
