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

// Counter-based random streams. A stream is keyed by (seed, domain, index);
// its k-th output is a SplitMix64 finalizer applied to key + k * golden.
// Streams for different trial indices never share state, so generation is
// order-independent and parallel runs reproduce serial ones bit for bit.

#ifndef CHESHIRE_RNG_HPP
#define CHESHIRE_RNG_HPP

#include <cstdint>
#include <limits>

namespace cheshire {

inline constexpr std::uint64_t splitmix64_mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

/// Independent stream families drawn from one seed.
enum class StreamDomain : std::uint64_t { Trial = 1, ReadoutNoise = 2, Fallback = 3, Test = 4 };

class CounterRng {
   public:
    using result_type = std::uint64_t;

    CounterRng(std::uint64_t seed, StreamDomain domain, std::uint64_t index)
        : key_(splitmix64_mix(splitmix64_mix(seed ^ splitmix64_mix(static_cast<std::uint64_t>(domain))) + index)) {
    }

    static constexpr result_type min() {
        return 0;
    }
    static constexpr result_type max() {
        return std::numeric_limits<result_type>::max();
    }
    result_type operator()() {
        return splitmix64_mix(key_ + (++counter_) * 0x9E3779B97F4A7C15ULL);
    }

   private:
    std::uint64_t key_;
    std::uint64_t counter_ = 0;
};

}  // namespace cheshire

#endif
