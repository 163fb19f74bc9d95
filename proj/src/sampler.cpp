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

#include "cheshire/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <ostream>
#include <random>
#include <string>
#include <thread>

#include "cheshire/errors.hpp"
#include "cheshire/parallel.hpp"
#include "cheshire/rng.hpp"

namespace cheshire {

namespace {

constexpr double kMinAcceptance = 0.01;
constexpr int kFallbackCells = 512;
constexpr int kMaxRejectionRounds = 1000000;

class BranchSampler {
   public:
    BranchSampler() = default;

    explicit BranchSampler(const SignedMixture &mixture) : mixture_(mixture) {
        info_.probability = mixture.total_weight();
        const double abs_total = mixture.total_abs_weight();
        info_.acceptance = abs_total > 0.0 ? info_.probability / abs_total : 0.0;

        double running = 0.0;
        for (std::size_t k = 0; k < mixture.components.size(); ++k) {
            running += std::abs(mixture.components[k].weight);
            cumulative_[k] = running / abs_total;
        }
        cumulative_.back() = 1.0;

        if (info_.acceptance < kMinAcceptance) {
            build_grid();
            info_.grid_fallback = true;
        }
    }

    const BranchInfo &info() const {
        return info_;
    }

    std::pair<double, double> draw(CounterRng &rng) const {
        return info_.grid_fallback ? draw_grid(rng) : draw_rejection(rng);
    }

   private:
    std::pair<double, double> draw_rejection(CounterRng &rng) const {
        std::uniform_real_distribution<double> uniform(0.0, 1.0);
        for (int round = 0; round < kMaxRejectionRounds; ++round) {
            const double pick = uniform(rng);
            const auto k = static_cast<std::size_t>(
                std::upper_bound(cumulative_.begin(), cumulative_.end() - 1, pick) - cumulative_.begin());
            const MixtureComponent &c = mixture_.components[k];
            std::normal_distribution<double> normal;
            const double x = c.mean_x + normal(rng) / mixture_.epsilon_x;
            const double y = c.mean_y + normal(rng) / mixture_.epsilon_y;
            const double envelope = mixture_.evaluate_envelope(x, y);
            if (uniform(rng) * envelope < mixture_.evaluate(x, y)) {
                return {x, y};
            }
        }
        throw std::runtime_error("rejection sampler failed to accept a draw");
    }

    void build_grid() {
        double lo_x = 0.0, hi_x = 0.0, lo_y = 0.0, hi_y = 0.0;
        for (const auto &c : mixture_.components) {
            lo_x = std::min(lo_x, c.mean_x);
            hi_x = std::max(hi_x, c.mean_x);
            lo_y = std::min(lo_y, c.mean_y);
            hi_y = std::max(hi_y, c.mean_y);
        }
        origin_x_ = lo_x - 8.0 / mixture_.epsilon_x;
        origin_y_ = lo_y - 8.0 / mixture_.epsilon_y;
        cell_x_ = (hi_x - lo_x + 16.0 / mixture_.epsilon_x) / kFallbackCells;
        cell_y_ = (hi_y - lo_y + 16.0 / mixture_.epsilon_y) / kFallbackCells;

        cell_cdf_.resize(static_cast<std::size_t>(kFallbackCells) * kFallbackCells);
        double running = 0.0;
        for (int i = 0; i < kFallbackCells; ++i) {
            for (int j = 0; j < kFallbackCells; ++j) {
                const double x = origin_x_ + (i + 0.5) * cell_x_;
                const double y = origin_y_ + (j + 0.5) * cell_y_;
                running += std::max(0.0, mixture_.evaluate(x, y));
                cell_cdf_[static_cast<std::size_t>(i) * kFallbackCells + j] = running;
            }
        }
        for (auto &v : cell_cdf_) {
            v /= running;
        }
    }

    std::pair<double, double> draw_grid(CounterRng &rng) const {
        std::uniform_real_distribution<double> uniform(0.0, 1.0);
        const double pick = uniform(rng);
        const auto cell = static_cast<std::size_t>(
            std::upper_bound(cell_cdf_.begin(), cell_cdf_.end() - 1, pick) - cell_cdf_.begin());
        const auto i = static_cast<int>(cell / kFallbackCells);
        const auto j = static_cast<int>(cell % kFallbackCells);
        return {origin_x_ + (i + uniform(rng)) * cell_x_, origin_y_ + (j + uniform(rng)) * cell_y_};
    }

    SignedMixture mixture_{};
    std::array<double, 6> cumulative_{};
    BranchInfo info_;
    std::vector<double> cell_cdf_;
    double origin_x_ = 0.0, origin_y_ = 0.0, cell_x_ = 0.0, cell_y_ = 0.0;
};

}  // namespace

unsigned default_thread_count() {
    if (const char *env = std::getenv("CHESHIRE_THREADS")) {
        try {
            const long v = std::stol(env);
            if (v >= 1) {
                return static_cast<unsigned>(v);
            }
        } catch (const std::exception &) {
        }
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

TrialBatch sample_trials(const Experiment &exp, const SamplerConfig &cfg) {
    if (cfg.n_trials == 0) {
        throw InvalidInput("n_trials must be at least 1");
    }
    const BranchSampler success(branch_mixture(exp));

    // The failed branch is the same engine run on 1 - E_f. It may be
    // impossible (E_f = identity), in which case it is never selected.
    BranchSampler failure;
    bool failure_possible = false;
    try {
        failure = BranchSampler(branch_mixture(exp.with_postselection(complement(exp.postselection()))));
        failure_possible = true;
    } catch (const ZeroPostselection &) {
    } catch (const InvalidInput &) {
    }

    const double p_success = postselection_probability(exp);
    TrialBatch batch;
    batch.success = success.info();
    if (failure_possible) {
        batch.failure = failure.info();
    }
    batch.records.resize(cfg.n_trials);

    const unsigned threads = cfg.threads > 0 ? cfg.threads : default_thread_count();
    detail::parallel_for(cfg.n_trials, threads, [&](std::uint64_t begin, std::uint64_t end) {
        std::uniform_real_distribution<double> uniform(0.0, 1.0);
        for (std::uint64_t i = begin; i < end; ++i) {
            CounterRng rng(cfg.seed, StreamDomain::Trial, i);
            const bool ok = !failure_possible || uniform(rng) < p_success;
            const auto [x, y] = ok ? success.draw(rng) : failure.draw(rng);
            batch.records[i] = TrialRecord{ok, x, y, ok ? x * y : -x * y};
        }
    });

    if (cfg.noise) {
        batch.records = apply_readout_noise(batch.records, cfg.noise->nu_x, cfg.noise->nu_y, cfg.seed);
    }
    return batch;
}

CheshireEstimate estimate_cheshire(std::span<const TrialRecord> records) {
    if (records.empty()) {
        throw InvalidInput("cannot estimate from an empty trial set");
    }
    const auto n = static_cast<double>(records.size());
    long double sum = 0.0L;
    for (const auto &r : records) {
        sum += r.c;
    }
    const double mean = static_cast<double>(sum / records.size());
    if (records.size() == 1) {
        return {mean, std::numeric_limits<double>::infinity(), 1};
    }
    long double squares = 0.0L;
    for (const auto &r : records) {
        const long double d = r.c - mean;
        squares += d * d;
    }
    const double variance = static_cast<double>(squares / (records.size() - 1));
    return {mean, std::sqrt(variance / n), records.size()};
}

std::vector<TrialRecord> apply_readout_noise(std::span<const TrialRecord> records, double nu_x, double nu_y,
                                             std::uint64_t seed) {
    if (!(nu_x >= 0.0) || !(nu_y >= 0.0)) {
        throw InvalidInput("noise standard deviations must be non-negative");
    }
    std::vector<TrialRecord> out(records.begin(), records.end());
    if (nu_x == 0.0 && nu_y == 0.0) {
        return out;
    }
    for (std::size_t i = 0; i < out.size(); ++i) {
        CounterRng rng(seed, StreamDomain::ReadoutNoise, i);
        std::normal_distribution<double> normal;
        TrialRecord &r = out[i];
        r.x += nu_x * normal(rng);
        r.y += nu_y * normal(rng);
        r.c = r.postselected ? r.x * r.y : -r.x * r.y;
    }
    return out;
}

void write_trials_csv(std::ostream &out, std::span<const TrialRecord> records) {
    out << "trial_index,postselected,x,y,c\n";
    char line[128];
    for (std::size_t i = 0; i < records.size(); ++i) {
        const TrialRecord &r = records[i];
        std::snprintf(line, sizeof line, "%zu,%d,%.17g,%.17g,%.17g\n", i, r.postselected ? 1 : 0, r.x, r.y, r.c);
        out << line;
    }
}

}  // namespace cheshire
