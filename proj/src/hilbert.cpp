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

#include "cheshire/hilbert.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "cheshire/errors.hpp"

namespace cheshire {

namespace {

using Vec2 = Eigen::Matrix<Complex, 2, 1>;

void require_finite(const Vec4 &v, const char *what) {
    for (int k = 0; k < 4; ++k) {
        if (!std::isfinite(v[k].real()) || !std::isfinite(v[k].imag())) {
            throw InvalidInput(std::string(what) + ": non-finite amplitude");
        }
    }
}

void require_splitter(Complex r, Complex t, const Mat2 &v_left, const Mat2 &v_right) {
    const double norm = std::norm(r) + std::norm(t);
    if (std::abs(norm - 1.0) > kOperatorTolerance) {
        std::ostringstream msg;
        msg << "splitter amplitudes must satisfy |r|^2 + |t|^2 = 1, got " << norm;
        throw InvalidInput(msg.str());
    }
    if (!is_unitary(v_left)) {
        throw InvalidInput("left-arm rotation is not unitary");
    }
    if (!is_unitary(v_right)) {
        throw InvalidInput("right-arm rotation is not unitary");
    }
}

Vec4 stack(const Vec2 &left, const Vec2 &right) {
    Vec4 v;
    v << left[0], left[1], right[0], right[1];
    return v;
}

}  // namespace

BlochAxis BlochAxis::from_vector(double x, double y, double z) {
    const double norm = std::sqrt(x * x + y * y + z * z);
    if (!std::isfinite(norm) || std::abs(norm - 1.0) > 1e-12) {
        std::ostringstream msg;
        msg << "Bloch axis must have unit norm, got |n| = " << norm;
        throw InvalidInput(msg.str());
    }
    return BlochAxis({x, y, z});
}

BlochAxis BlochAxis::from_angles(double theta, double phi) {
    if (!std::isfinite(theta) || !std::isfinite(phi)) {
        throw InvalidInput("Bloch axis angles must be finite");
    }
    return BlochAxis({std::sin(theta) * std::cos(phi), std::sin(theta) * std::sin(phi), std::cos(theta)});
}

double BlochAxis::theta() const {
    return std::acos(std::clamp(n_[2], -1.0, 1.0));
}

double BlochAxis::phi() const {
    if (n_[0] == 0.0 && n_[1] == 0.0) {
        return 0.0;
    }
    return std::atan2(n_[1], n_[0]);
}

Mat2 BlochAxis::eigenbasis() const {
    // Exact identity for the z axis keeps default-axis computations free of rounding.
    if (n_[0] == 0.0 && n_[1] == 0.0 && n_[2] == 1.0) {
        return Mat2::Identity();
    }
    const double half = 0.5 * theta();
    const Complex phase = std::polar(1.0, phi());
    Mat2 w;
    w << std::cos(half), -std::conj(phase) * std::sin(half), phase * std::sin(half), std::cos(half);
    return w;
}

Mat2 BlochAxis::pauli() const {
    const Complex i(0.0, 1.0);
    Mat2 p;
    p << n_[2], n_[0] - i * n_[1], n_[0] + i * n_[1], -n_[2];
    return p;
}

PureState PureState::from_amplitudes(const Vec4 &amplitudes) {
    require_finite(amplitudes, "state");
    const double norm = amplitudes.norm();
    if (norm == 0.0) {
        throw InvalidInput("state vector has zero norm");
    }
    return PureState(amplitudes / norm);
}

PureState PureState::from_axis_amplitudes(const Vec4 &amplitudes, const BlochAxis &axis) {
    require_finite(amplitudes, "state");
    return from_amplitudes(axis_change(axis) * amplitudes);
}

Vec4 PureState::axis_amplitudes(const BlochAxis &axis) const {
    return axis_change(axis).adjoint() * amplitudes_;
}

SystemOperator SystemOperator::projector(const PureState &psi) {
    return SystemOperator(psi.amplitudes() * psi.amplitudes().adjoint());
}

double SystemOperator::max_abs_entry() const {
    return m_.cwiseAbs().maxCoeff();
}

OperatorDiagnostics validate(const SystemOperator &op, OperatorRole role) {
    OperatorDiagnostics d;
    const Mat4 &m = op.matrix();
    const double scale = std::max(op.max_abs_entry(), 1.0);
    const double tol = kOperatorTolerance * scale;

    for (int r = 0; r < 4; ++r) {
        for (int c = 0; c < 4; ++c) {
            const Complex z = m(r, c);
            if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) {
                d.ok = false;
                d.failures.push_back("non-finite entry");
                return d;
            }
        }
    }

    d.hermiticity_residual = (m - m.adjoint()).cwiseAbs().maxCoeff();
    if (d.hermiticity_residual > tol) {
        d.failures.push_back("not Hermitian (residual " + std::to_string(d.hermiticity_residual) + ")");
    }
    const Mat4 hermitian_part = 0.5 * (m + m.adjoint());
    Eigen::SelfAdjointEigenSolver<Mat4> solver(hermitian_part, Eigen::EigenvaluesOnly);
    d.min_eigenvalue = solver.eigenvalues().minCoeff();
    d.max_eigenvalue = solver.eigenvalues().maxCoeff();
    d.trace = m.trace().real();
    d.imag_trace = m.trace().imag();

    if (d.min_eigenvalue < -tol) {
        d.failures.push_back("negative eigenvalue " + std::to_string(d.min_eigenvalue));
    }
    switch (role) {
        case OperatorRole::Density:
            if (std::abs(d.trace - 1.0) > tol) {
                d.failures.push_back("trace " + std::to_string(d.trace) + " differs from 1");
            }
            break;
        case OperatorRole::Povm:
            if (d.max_eigenvalue > 1.0 + tol) {
                d.failures.push_back("eigenvalue " + std::to_string(d.max_eigenvalue) + " exceeds 1");
            }
            if (!(d.trace > tol) || d.trace > 4.0 + tol) {
                d.failures.push_back("trace " + std::to_string(d.trace) + " outside (0, 4]");
            }
            break;
    }
    d.ok = d.failures.empty();
    return d;
}

void require_valid(const SystemOperator &op, OperatorRole role, const std::string &what) {
    const auto d = validate(op, role);
    if (d.ok) {
        return;
    }
    std::string msg = what + (role == OperatorRole::Density ? " is not a density matrix:" : " is not a POVM element:");
    for (const auto &f : d.failures) {
        msg += " " + f + ";";
    }
    throw InvalidInput(msg);
}

bool is_unitary(const Mat2 &u, double tol) {
    return (u.adjoint() * u - Mat2::Identity()).cwiseAbs().maxCoeff() <= tol;
}

PureState make_preparation(Complex r, Complex t, const Mat2 &v_left, const Mat2 &v_right) {
    require_splitter(r, t, v_left, v_right);
    const Vec2 h(1.0, 0.0);
    return PureState::from_amplitudes(stack(v_left * (r * h), v_right * (t * h)));
}

PureState make_postselection(Complex r, Complex t, const Mat2 &v_left, const Mat2 &v_right) {
    require_splitter(r, t, v_left, v_right);
    const Vec2 h(1.0, 0.0);
    return PureState::from_amplitudes(
        stack(v_left.adjoint() * (std::conj(r) * h), v_right.adjoint() * (std::conj(t) * h)));
}

Mat2 unitary_completion(const Vec2 &target) {
    const double norm = target.norm();
    if (!(norm > 0.0)) {
        throw InvalidInput("cannot complete a zero vector to a unitary");
    }
    const Complex a = target[0] / norm;
    const Complex b = target[1] / norm;
    Mat2 u;
    u << a, -std::conj(b), b, std::conj(a);
    return u;
}

SystemOperator projector_left() {
    Mat4 m = Mat4::Zero();
    m(0, 0) = 1.0;
    m(1, 1) = 1.0;
    return SystemOperator(m);
}

SystemOperator projector_right() {
    Mat4 m = Mat4::Zero();
    m(2, 2) = 1.0;
    m(3, 3) = 1.0;
    return SystemOperator(m);
}

SystemOperator sigma_r(const BlochAxis &axis) {
    Mat4 m = Mat4::Zero();
    m.block<2, 2>(2, 2) = axis.pauli();
    return SystemOperator(m);
}

SystemOperator complement(const SystemOperator &effect) {
    require_valid(effect, OperatorRole::Povm, "post-selection");
    return SystemOperator(Mat4::Identity() - effect.matrix());
}

Mat4 axis_change(const BlochAxis &axis) {
    Mat4 w = Mat4::Zero();
    const Mat2 b = axis.eigenbasis();
    w.block<2, 2>(0, 0) = b;
    w.block<2, 2>(2, 2) = b;
    return w;
}

SystemOperator to_storage_basis(const Mat4 &axis_matrix, const BlochAxis &axis) {
    const Mat4 w = axis_change(axis);
    return SystemOperator(w * axis_matrix * w.adjoint());
}

Mat4 to_axis_basis(const SystemOperator &op, const BlochAxis &axis) {
    const Mat4 w = axis_change(axis);
    return w.adjoint() * op.matrix() * w;
}

bool is_path_block_diagonal(const SystemOperator &op, double tol) {
    const double scale = std::max(op.max_abs_entry(), 1e-300);
    const double off = std::max(op.matrix().block<2, 2>(0, 2).cwiseAbs().maxCoeff(),
                                op.matrix().block<2, 2>(2, 0).cwiseAbs().maxCoeff());
    return off <= tol * scale;
}

}  // namespace cheshire
