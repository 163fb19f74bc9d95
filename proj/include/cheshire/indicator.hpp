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

// The Cheshire-cat indicator C(E_f) = <xy> P{E_f}: nonzero only when the
// path and the polarization measurements see interference between the arms.

#ifndef CHESHIRE_INDICATOR_HPP
#define CHESHIRE_INDICATOR_HPP

#include <optional>
#include <utility>

#include "cheshire/hilbert.hpp"
#include "cheshire/statistics.hpp"

namespace cheshire {

/// Readout-noise verdict. Noise levels are standard deviations of additive
/// Gaussian readout noise; "much less than" is read as a factor `margin`.
struct NoiseDiagnostics {
    bool ok;
    double margin;
    /// nu_x nu_y / |C|
    double product_ratio;
    /// nu_x / (w_x / 2), nu_y / (w_y / 2)
    double ratio_x;
    double ratio_y;
};

struct CheshireReport {
    /// (w_x w_y / 2) Re Tr[E_f sigma_R rho_i Pi_L]
    double c_of_Ef;
    /// <xy> P{E_f} from the moment engine; equals c_of_Ef.
    double c_from_moments;
    /// 2 C(E_f), what the signed-trial average estimates.
    double c_total;
    double cross_xy;
    double p_postselect;
    double w_x;
    double w_y;
    std::optional<NoiseDiagnostics> noise;
};

inline constexpr double kDefaultNoiseMargin = 10.0;

/// Computes both forms of C(E_f). Throws ZeroPostselection via the engine.
CheshireReport cheshire_parameter(const Experiment &exp);

/// (C(E_f), C(1 - E_f)), each from its own branch's moments. Throws
/// InvalidInput when 1 - E_f cannot be post-selected.
std::pair<double, double> complement_identity(const Experiment &exp);

/// Preparation and post-selection reaching |C| = w_x w_y / 4:
///   Psi = (a|L+> + b|L->)/sqrt2 + (e^{i phi}|R+> + |R->)/2
///   Phi = (a|L+> + b|L->)/sqrt2 + (e^{i phi}|R+> - |R->)/2
/// Amplitudes are in the eigenbasis of `axis`. Requires |a|^2 + |b|^2 = 1.
std::pair<PureState, PureState> max_family(Complex a, Complex b, double phi, const BlochAxis &axis = BlochAxis());

/// Passes iff nu_x nu_y < |C|/margin, nu_x < w_x/(2 margin) and nu_y < w_y/(2 margin).
NoiseDiagnostics noise_check(const CheshireReport &report, double nu_x, double nu_y, double w_x, double w_y,
                             double margin = kDefaultNoiseMargin);

}  // namespace cheshire

#endif
