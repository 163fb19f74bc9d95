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

#include "cheshire/meters.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <sstream>

#include "cheshire/errors.hpp"

namespace cheshire {

GaussianMeter::GaussianMeter(double epsilon, double epsilon_tilde) : epsilon_(epsilon), epsilon_tilde_(epsilon_tilde) {
    if (!std::isfinite(epsilon) || !std::isfinite(epsilon_tilde) || !(epsilon > 0.0)) {
        throw InvalidInput("meter parameters must be finite with epsilon > 0");
    }
    if (epsilon > epsilon_tilde) {
        std::ostringstream msg;
        msg << "meter violates the uncertainty relation: epsilon = " << epsilon << " > epsilon_tilde = " << epsilon_tilde;
        throw InvalidInput(msg.str());
    }
}

double meter_density(const GaussianMeter &m, double x, double x_prime) {
    const double sum = x + x_prime;
    const double diff = x - x_prime;
    const double e = m.epsilon();
    const double et = m.epsilon_tilde();
    return e / std::sqrt(2.0 * std::numbers::pi) * std::exp(-(e * e * sum * sum + et * et * diff * diff) / 8.0);
}

double log_w_factor(double epsilon_tilde) {
    return -epsilon_tilde * epsilon_tilde / 8.0;
}

double w_factor(double epsilon_tilde) {
    return std::exp(log_w_factor(epsilon_tilde));
}

double epsilon_tilde_for_w(double w) {
    if (!(w > 0.0) || w > 1.0) {
        throw InvalidInput("coherence factor must lie in (0, 1]");
    }
    return std::sqrt(-8.0 * std::log(w));
}

Regime classify_regime(const GaussianMeter &m) {
    // Work in decades: u = log10(Delta_x), v = log10(kappa). v <= u always.
    const double u = -std::log10(m.epsilon());
    const double v = -std::log10(m.epsilon_tilde());

    if (u < -1.0) {
        return {RegimeLabel::Strong, false};
    }
    if (v > 1.0) {
        return {RegimeLabel::WeakCoherent, false};
    }
    if (u > 1.0 && v < -1.0) {
        return {RegimeLabel::WeakIncoherent, false};
    }

    const std::array<std::pair<double, RegimeLabel>, 3> distance{{
        {std::max(0.0, u + 1.0), RegimeLabel::Strong},
        {std::max(0.0, 1.0 - v), RegimeLabel::WeakCoherent},
        {std::hypot(std::max(0.0, 1.0 - u), std::max(0.0, v + 1.0)), RegimeLabel::WeakIncoherent},
    }};
    const auto nearest = std::min_element(distance.begin(), distance.end(),
                                          [](const auto &a, const auto &b) { return a.first < b.first; });
    return {nearest->second, true};
}

std::string_view to_string(RegimeLabel label) {
    switch (label) {
        case RegimeLabel::Strong:
            return "strong";
        case RegimeLabel::WeakCoherent:
            return "weak-coherent";
        case RegimeLabel::WeakIncoherent:
            return "weak-incoherent";
        case RegimeLabel::Intermediate:
            return "intermediate";
    }
    return "unknown";
}

}  // namespace cheshire
