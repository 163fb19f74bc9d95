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

// Weak values of the path projectors and the right-arm polarization for a
// preparation rho_i and a post-selection E_f:
//
//   A_w      = Tr[E_f A rho_i] / Tr[E_f rho_i]
//   (AB)_w   = Tr[E_f A rho_i B] / Tr[E_f rho_i]
//
// with A, B drawn from {Pi_L, Pi_R, sigma_R}.

#ifndef CHESHIRE_WEAK_VALUES_HPP
#define CHESHIRE_WEAK_VALUES_HPP

#include "cheshire/hilbert.hpp"

namespace cheshire {

/// The five independent weak values (left, sigma, left_left, sigma_sigma,
/// sigma_left) and four redundant ones filled from the identities
///   right = 1 - left,  right_right = 1 - 2 Re(left) + left_left,
///   left_right = left - left_left,  sigma_right = sigma - sigma_left.
struct WeakValueSet {
    Complex left;         // Pi_L
    Complex right;        // Pi_R
    Complex sigma;        // sigma_R
    Complex sigma_left;   // Tr[E sigma_R rho Pi_L] / Tr[E rho]
    Complex sigma_right;  // Tr[E sigma_R rho Pi_R] / Tr[E rho]
    Complex left_right;   // Tr[E Pi_L rho Pi_R] / Tr[E rho]
    double left_left = 0.0;
    double right_right = 0.0;
    double sigma_sigma = 0.0;

    /// Fills the redundant members from the independent ones. `unit` is the
    /// value of Tr[E rho] in the normalization in use (1 for weak values).
    void complete(double unit = 1.0);
    /// Every member multiplied by `s`.
    WeakValueSet scaled(double s) const;
};

/// Weak values without the division by Tr[E rho]: each member holds the bare
/// trace, and `trace` holds Tr[E rho] itself. Defined for every pair,
/// including orthogonal ones.
struct TraceProducts {
    double trace = 0.0;
    WeakValueSet products;

    /// Throws NearOrthogonal below the threshold used by weak_values_general.
    WeakValueSet weak_values() const;
};

/// <Phi|Pi_L|Psi>, <Phi|sigma_R|Psi>, <Phi|Psi> for pure pairs.
struct MatrixElements {
    Complex left;
    Complex sigma;
    Complex overlap;
};

/// Relative threshold on |Tr[E rho]| below which a pair counts as orthogonal.
inline constexpr double kOrthogonalityThreshold = 1e-14;

TraceProducts trace_products(const SystemOperator &rho, const SystemOperator &effect, const BlochAxis &axis);

/// Throws NearOrthogonal when |Tr[E rho]| < 1e-14 max|rho| max|E|.
WeakValueSet weak_values_general(const SystemOperator &rho, const SystemOperator &effect, const BlochAxis &axis);

/// Pure-state weak values <Phi|A|Psi>/<Phi|Psi>. Throws NearOrthogonal for an orthogonal pair.
WeakValueSet weak_values_pure(const PureState &psi, const PureState &phi, const BlochAxis &axis);

MatrixElements matrix_elements(const PureState &psi, const PureState &phi, const BlochAxis &axis);

}  // namespace cheshire

#endif
