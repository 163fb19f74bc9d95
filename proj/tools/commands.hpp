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

// Subcommands of the `cheshire` tool. Each is a plain function so tests can
// call it in-process; `run_cli` adds argument parsing and exit codes.

#ifndef CHESHIRE_TOOLS_COMMANDS_HPP
#define CHESHIRE_TOOLS_COMMANDS_HPP

#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "cheshire/oracle.hpp"
#include "cheshire/sampler.hpp"
#include "config.hpp"
#include "json.hpp"

namespace cheshire::cli {

enum ExitCode : int {
    kExitOk = 0,
    kExitFailure = 1,
    kExitConfig = 2,
    kExitZeroPostselection = 3,
    kExitOracleMismatch = 4,
};

inline constexpr const char *kNoPostselectionNote = "no post-selection => no Cheshire cat";

/// Weak values, N, P{E_f}, moments, limits, Cheshire report, notes and the
/// config echo. Throws ZeroPostselection.
nlohmann::json analyze_report(const ExperimentConfig &cfg);

/// Flat columns of the analyze report, in CSV order.
std::vector<std::string> analyze_columns();
std::vector<double> analyze_row(const nlohmann::json &report);

/// Conditional density on the configured grid. Columns: x, y, density.
void write_density_csv(std::ostream &out, const ExperimentConfig &cfg);

struct SampleResult {
    TrialBatch batch;
    CheshireEstimate estimate;
    nlohmann::json summary;
};

SampleResult run_sample(const ExperimentConfig &cfg);

using ReferenceFactory = std::function<oracle::BranchDensity(const Experiment &)>;

struct OracleCheckResult {
    bool pass = false;
    double max_residual = 0.0;
    double tolerance = 0.0;
    double mass_success = 0.0;
    double mass_failure = 0.0;
    double min_value = 0.0;
    long long nodes_x = 0;
    long long nodes_y = 0;
    nlohmann::json to_json() const;
};

/// Brute-force grid law against `reference` (the analytic engine unless a
/// test substitutes another). Throws ConfigError if the grid would exceed
/// `max_cells` nodes per branch.
OracleCheckResult run_oracle_check(const ExperimentConfig &cfg, const ReferenceFactory &reference = oracle::engine_density,
                                   long long max_cells = 40'000'000);

struct SweepPlan {
    /// Dotted config paths, all set to the same value on each row.
    std::vector<std::string> params;
    std::vector<double> values;
};

/// Sweep section of a config document ({params, values} or {params, range: {start, stop, count}}).
SweepPlan sweep_from_config(const nlohmann::json &doc);
/// "0.1,0.2,0.5" or "start:stop:count" (inclusive, linear).
std::vector<double> parse_values(const std::string &text);

struct SweepTable {
    std::vector<std::string> columns;
    /// NaN marks a quantity that does not exist on that row.
    std::vector<std::vector<double>> rows;
    std::vector<std::string> status;
};

/// Columns: value, w_x, w_y, p_postselect, norm_N, mean_x, mean_y, cross_xy,
/// c_of_Ef, c_total; status is "ok" or "zero_postselection".
SweepTable run_sweep(const nlohmann::json &doc, const SweepPlan &spec);
void write_sweep_csv(std::ostream &out, const SweepTable &table);
nlohmann::json sweep_to_json(const SweepTable &table);

/// Full command line, returns the exit code.
int run_cli(int argc, const char *const *argv, std::ostream &out, std::ostream &err);

}  // namespace cheshire::cli

#endif
