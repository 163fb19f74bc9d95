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

// Experiment configuration files. JSON with nested sections; complex
// numbers are [re, im] pairs and matrices are row-major lists of rows.
//
//   preparation    one of amplitudes | density | splitter, plus optional
//                  "basis": "axis" (default, ordered L+, L-, R+, R-) or "lab" (LH, LV, RH, RV)
//   postselection  one of amplitudes | povm | splitter, same basis key
//   axis           theta, phi (radians; default the z axis)
//   meters         x, y: epsilon, epsilon_tilde (defaults to epsilon)
//   sampler        n_trials, seed, noise {nu_x, nu_y}
//   outputs        trials, report, density_grid {points, x_range, y_range}, oracle {spacing, tolerance}
//   coupling       a, b (metadata; readouts are always in units of a and b)

#ifndef CHESHIRE_TOOLS_CONFIG_HPP
#define CHESHIRE_TOOLS_CONFIG_HPP

#include <array>
#include <optional>
#include <stdexcept>
#include <string>

#include "cheshire/hilbert.hpp"
#include "cheshire/meters.hpp"
#include "cheshire/sampler.hpp"
#include "cheshire/statistics.hpp"
#include "json.hpp"

namespace cheshire::cli {

/// A config problem, located by a dotted field path.
class ConfigError : public std::runtime_error {
   public:
    ConfigError(const std::string &path, const std::string &message)
        : std::runtime_error(path.empty() ? message : path + ": " + message), path_(path) {
    }
    const std::string &path() const noexcept {
        return path_;
    }

   private:
    std::string path_;
};

struct DensityGridOutput {
    int points = 101;
    std::optional<std::array<double, 2>> x_range;
    std::optional<std::array<double, 2>> y_range;
};

struct OutputsConfig {
    std::string trials = "trials.csv";
    std::string report = "report.json";
    std::optional<DensityGridOutput> density_grid;
    double oracle_spacing = 1.0 / 16.0;
    double oracle_tolerance = 1e-6;
};

struct ExperimentConfig {
    SystemOperator preparation;
    SystemOperator postselection;
    /// Set when the section was given as a state vector (amplitudes or splitter).
    std::optional<PureState> psi;
    std::optional<PureState> phi;
    double theta = 0.0;
    double phi_angle = 0.0;
    BlochAxis axis;
    GaussianMeter meter_x = GaussianMeter::pure(1.0);
    GaussianMeter meter_y = GaussianMeter::pure(1.0);
    SamplerConfig sampler;
    OutputsConfig outputs;
    double coupling_a = 1.0;
    double coupling_b = 1.0;

    /// Throws ZeroPostselection if the post-selection can never succeed.
    Experiment experiment() const;
};

/// Throws ConfigError for every malformed or invalid field.
ExperimentConfig parse_config(const nlohmann::json &doc);
ExperimentConfig load_config(const std::string &path);
nlohmann::json read_json_file(const std::string &path);

/// Config that parses back to the same experiment bit for bit. Operators are
/// written as lab-basis matrices.
nlohmann::json config_echo(const ExperimentConfig &cfg);

/// Sets the value at a dotted path ("meters.x.epsilon", "preparation.amplitudes.2.0").
/// Missing object keys are created; array indices must exist.
void set_path(nlohmann::json &doc, const std::string &path, const nlohmann::json &value);

nlohmann::json complex_to_json(Complex z);

}  // namespace cheshire::cli

#endif
