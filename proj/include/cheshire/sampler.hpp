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

// Monte Carlo trials: post-selection outcome plus both meter readouts.
//
// Each branch (E_f succeeded, or its complement 1 - E_f) has a readout law
// that is a signed mixture of six Gaussians. Draws use rejection against the
// same mixture with absolute weights; acceptance is sum(w) / sum(|w|). When
// that falls below 1% the branch switches to inverse-CDF sampling on a
// 512 x 512 grid with uniform jitter inside cells (bias O(cell width)).

#ifndef CHESHIRE_SAMPLER_HPP
#define CHESHIRE_SAMPLER_HPP

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "cheshire/statistics.hpp"

namespace cheshire {

struct TrialRecord {
    bool postselected;
    double x;
    double y;
    /// x y if post-selected, -x y otherwise.
    double c;
};

struct NoiseLevels {
    double nu_x = 0.0;
    double nu_y = 0.0;
};

struct SamplerConfig {
    std::uint64_t n_trials = 1;
    std::uint64_t seed = 0;
    /// Additive Gaussian readout noise applied after sampling.
    std::optional<NoiseLevels> noise;
    /// Worker threads; 0 means CHESHIRE_THREADS, else hardware concurrency.
    unsigned threads = 0;
};

struct BranchInfo {
    double probability = 0.0;
    /// Expected rejection acceptance; 0 for a branch that never occurs.
    double acceptance = 0.0;
    bool grid_fallback = false;
};

struct TrialBatch {
    std::vector<TrialRecord> records;
    BranchInfo success;
    BranchInfo failure;
};

struct CheshireEstimate {
    double estimate;
    /// Sample standard deviation over sqrt(n); infinite for a single trial.
    double std_error;
    std::uint64_t n;
};

/// Throws InvalidInput for n_trials == 0.
TrialBatch sample_trials(const Experiment &exp, const SamplerConfig &cfg);

/// Mean of c and its standard error. Throws InvalidInput on empty input.
CheshireEstimate estimate_cheshire(std::span<const TrialRecord> records);

/// Adds independent N(0, nu^2) noise to the readouts of trial i from the
/// stream (seed, i) and recomputes c. Throws InvalidInput for negative nu.
std::vector<TrialRecord> apply_readout_noise(std::span<const TrialRecord> records, double nu_x, double nu_y,
                                             std::uint64_t seed);

/// Worker count from CHESHIRE_THREADS, falling back to hardware concurrency.
unsigned default_thread_count();

/// Columns: trial_index, postselected (0/1), x, y, c.
void write_trials_csv(std::ostream &out, std::span<const TrialRecord> records);

}  // namespace cheshire

#endif
