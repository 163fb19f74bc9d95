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

#include "cheshire/indicator.hpp"

#include <cmath>
#include <limits>
#include <numbers>

#include "cheshire/errors.hpp"

namespace cheshire {

CheshireReport cheshire_parameter(const Experiment &exp) {
    const Mat4 &e = exp.postselection().matrix();
    const Mat4 &rho = exp.preparation().matrix();
    const Complex interference =
        (e * sigma_r(exp.axis()).matrix() * rho * projector_left().matrix()).trace();

    const MomentReport m = moments(exp);
    CheshireReport r{};
    r.w_x = exp.w_x();
    r.w_y = exp.w_y();
    r.c_of_Ef = 0.5 * exp.w_xy() * interference.real();
    r.c_from_moments = m.cross_xy * m.p_postselect;
    r.c_total = 2.0 * r.c_of_Ef;
    r.cross_xy = m.cross_xy;
    r.p_postselect = m.p_postselect;
    return r;
}

std::pair<double, double> complement_identity(const Experiment &exp) {
    const SystemOperator other = complement(exp.postselection());
    if (!validate(other, OperatorRole::Povm).ok) {
        throw InvalidInput("the complement of the post-selection is not a usable POVM element");
    }
    const CheshireReport here = cheshire_parameter(exp);
    const CheshireReport there = cheshire_parameter(exp.with_postselection(other));
    return {here.c_from_moments, there.c_from_moments};
}

std::pair<PureState, PureState> max_family(Complex a, Complex b, double phi, const BlochAxis &axis) {
    if (std::abs(std::norm(a) + std::norm(b) - 1.0) > kOperatorTolerance) {
        throw InvalidInput("max-family amplitudes must satisfy |a|^2 + |b|^2 = 1");
    }
    if (!std::isfinite(phi)) {
        throw InvalidInput("max-family phase must be finite");
    }
    const double root_half = std::numbers::sqrt2 / 2.0;
    const Complex phase = std::polar(0.5, phi);
    Vec4 psi;
    Vec4 phi_state;
    psi << a * root_half, b * root_half, phase, 0.5;
    phi_state << a * root_half, b * root_half, phase, -0.5;
    return {PureState::from_axis_amplitudes(psi, axis), PureState::from_axis_amplitudes(phi_state, axis)};
}

NoiseDiagnostics noise_check(const CheshireReport &report, double nu_x, double nu_y, double w_x, double w_y,
                             double margin) {
    if (!(nu_x >= 0.0) || !(nu_y >= 0.0)) {
        throw InvalidInput("noise levels must be non-negative");
    }
    if (!(margin > 0.0)) {
        throw InvalidInput("noise margin must be positive");
    }
    const double c = std::abs(report.c_total);
    NoiseDiagnostics d{};
    d.margin = margin;
    const double product = nu_x * nu_y;
    d.product_ratio = product == 0.0 ? 0.0 : c > 0.0 ? product / c : std::numeric_limits<double>::infinity();
    d.ratio_x = nu_x / (0.5 * w_x);
    d.ratio_y = nu_y / (0.5 * w_y);
    d.ok = nu_x * nu_y < c / margin && nu_x < 0.5 * w_x / margin && nu_y < 0.5 * w_y / margin;
    return d;
}

}  // namespace cheshire
