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

// Gaussian pointer states. Readouts are in normalized units x = X/a, so an
// ideal strong measurement of the path sits at 0 or 1 and of the
// polarization at -1 or +1.

#ifndef CHESHIRE_METERS_HPP
#define CHESHIRE_METERS_HPP

#include <string_view>

namespace cheshire {

/// Zero-mean Gaussian meter. `epsilon` is the inverse readout spread 1/Delta_x;
/// `epsilon_tilde` is twice the momentum spread, the inverse coherence length.
/// The state is pure iff the two coincide.
class GaussianMeter {
   public:
    /// Throws InvalidInput unless 0 < epsilon <= epsilon_tilde (both finite).
    GaussianMeter(double epsilon, double epsilon_tilde);
    static GaussianMeter pure(double epsilon) {
        return GaussianMeter(epsilon, epsilon);
    }

    double epsilon() const {
        return epsilon_;
    }
    double epsilon_tilde() const {
        return epsilon_tilde_;
    }
    double readout_spread() const {
        return 1.0 / epsilon_;
    }
    double coherence_length() const {
        return 1.0 / epsilon_tilde_;
    }
    bool is_pure() const {
        return epsilon_ == epsilon_tilde_;
    }

    bool operator==(const GaussianMeter &) const = default;

   private:
    double epsilon_;
    double epsilon_tilde_;
};

/// Position-space kernel rho(x, x').
double meter_density(const GaussianMeter &m, double x, double x_prime);

/// log of the coherence factor, -epsilon_tilde^2 / 8.
double log_w_factor(double epsilon_tilde);
/// Coherence factor exp(-epsilon_tilde^2 / 8); accepts epsilon_tilde = 0.
double w_factor(double epsilon_tilde);
inline double w_factor(const GaussianMeter &m) {
    return w_factor(m.epsilon_tilde());
}

/// Inverse of w_factor on (0, 1].
double epsilon_tilde_for_w(double w);

enum class RegimeLabel { Strong, WeakCoherent, WeakIncoherent, Intermediate };

/// Regime of a meter measuring a two-valued observable. Outside the three
/// defining regions the meter is in a crossover and `label` is the nearest
/// region (distance in decades of Delta_x and kappa). Intermediate exists
/// only for observables with more than two eigenvalues and is never returned.
struct Regime {
    RegimeLabel label;
    bool crossover = false;
};

/// Thresholds: strong iff 1/eps < 0.1; weak-coherent iff 1/eps~ > 10;
/// weak-incoherent iff 1/eps > 10 and 1/eps~ < 0.1.
Regime classify_regime(const GaussianMeter &m);

std::string_view to_string(RegimeLabel label);

}  // namespace cheshire

#endif
