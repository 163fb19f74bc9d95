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

#include "cheshire/weak_values.hpp"

#include <cmath>
#include <sstream>

#include "cheshire/errors.hpp"

namespace cheshire {

namespace {

Complex trace_of_product(const Mat4 &a, const Mat4 &b) {
    // Tr(a b) without forming the product.
    return (a.array() * b.transpose().array()).sum();
}

[[noreturn]] void throw_orthogonal(double trace, double scale) {
    std::ostringstream msg;
    msg << "preparation and post-selection are orthogonal (|Tr[E rho]| = " << std::abs(trace)
        << ", scale " << scale << "); use matrix elements instead of weak values";
    throw NearOrthogonal(msg.str());
}

}  // namespace

void WeakValueSet::complete(double unit) {
    right = unit - left;
    right_right = unit - 2.0 * left.real() + left_left;
    left_right = left - left_left;
    sigma_right = sigma - sigma_left;
}

WeakValueSet WeakValueSet::scaled(double s) const {
    WeakValueSet w = *this;
    w.left *= s;
    w.right *= s;
    w.sigma *= s;
    w.sigma_left *= s;
    w.sigma_right *= s;
    w.left_right *= s;
    w.left_left *= s;
    w.right_right *= s;
    w.sigma_sigma *= s;
    return w;
}

TraceProducts trace_products(const SystemOperator &rho, const SystemOperator &effect, const BlochAxis &axis) {
    const Mat4 &e = effect.matrix();
    const Mat4 &r = rho.matrix();
    const Mat4 pl = projector_left().matrix();
    const Mat4 s = sigma_r(axis).matrix();

    const Mat4 e_pl = e * pl;
    const Mat4 e_s = e * s;
    const Mat4 r_pl = r * pl;
    const Mat4 r_s = r * s;

    TraceProducts t;
    t.trace = trace_of_product(e, r).real();
    t.products.left = trace_of_product(e_pl, r);
    t.products.sigma = trace_of_product(e_s, r);
    t.products.left_left = trace_of_product(e_pl, r_pl).real();
    t.products.sigma_sigma = trace_of_product(e_s, r_s).real();
    t.products.sigma_left = trace_of_product(e_s, r_pl);
    t.products.complete(t.trace);
    return t;
}

WeakValueSet TraceProducts::weak_values() const {
    // The caller-facing threshold lives in weak_values_general, which knows the operator scale.
    if (trace == 0.0) {
        throw_orthogonal(trace, 1.0);
    }
    WeakValueSet w = products.scaled(1.0 / trace);
    w.complete(1.0);
    return w;
}

WeakValueSet weak_values_general(const SystemOperator &rho, const SystemOperator &effect, const BlochAxis &axis) {
    const TraceProducts t = trace_products(rho, effect, axis);
    const double scale = rho.max_abs_entry() * effect.max_abs_entry();
    if (!(std::abs(t.trace) >= kOrthogonalityThreshold * scale)) {
        throw_orthogonal(t.trace, scale);
    }
    return t.weak_values();
}

WeakValueSet weak_values_pure(const PureState &psi, const PureState &phi, const BlochAxis &axis) {
    const MatrixElements me = matrix_elements(psi, phi, axis);
    if (!(std::abs(me.overlap) >= std::sqrt(kOrthogonalityThreshold))) {
        throw_orthogonal(std::norm(me.overlap), 1.0);
    }
    WeakValueSet w;
    w.left = me.left / me.overlap;
    w.sigma = me.sigma / me.overlap;
    w.left_left = std::norm(w.left);
    w.sigma_sigma = std::norm(w.sigma);
    w.sigma_left = std::conj(w.left) * w.sigma;
    w.complete(1.0);
    return w;
}

MatrixElements matrix_elements(const PureState &psi, const PureState &phi, const BlochAxis &axis) {
    const Vec4 &ket = psi.amplitudes();
    const Vec4 &bra = phi.amplitudes();
    MatrixElements me;
    me.overlap = bra.dot(ket);
    me.left = bra.dot(projector_left().matrix() * ket);
    me.sigma = bra.dot(sigma_r(axis).matrix() * ket);
    return me;
}

}  // namespace cheshire
