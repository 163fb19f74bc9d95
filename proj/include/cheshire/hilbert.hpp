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

// Linear algebra on the 4-dimensional path (x) polarization space of the photon.
//
// Storage basis is fixed: (L,H), (L,V), (R,H), (R,V). H/V coincide with the
// +/- eigenstates of the polarization axis z, so for the default axis the
// storage order is (L,+), (L,-), (R,+), (R,-). States written in the
// eigenbasis of another axis n go through `PureState::from_axis_amplitudes`
// or `to_storage_basis`.

#ifndef CHESHIRE_HILBERT_HPP
#define CHESHIRE_HILBERT_HPP

#include <Eigen/Dense>
#include <array>
#include <complex>
#include <string>
#include <vector>

namespace cheshire {

using Complex = std::complex<double>;
using Vec4 = Eigen::Matrix<Complex, 4, 1>;
using Mat4 = Eigen::Matrix<Complex, 4, 4>;
using Mat2 = Eigen::Matrix<Complex, 2, 2>;

/// Relative tolerance for Hermiticity, positivity and unitarity checks.
inline constexpr double kOperatorTolerance = 1e-10;

/// Unit vector on the Bloch sphere selecting the polarization measured in the right arm.
class BlochAxis {
   public:
    /// The z axis; its eigenstates are H (+) and V (-).
    BlochAxis() = default;

    /// Throws InvalidInput unless |(x, y, z)| = 1 within 1e-12.
    static BlochAxis from_vector(double x, double y, double z);
    /// Polar angle theta from +z, azimuth phi.
    static BlochAxis from_angles(double theta, double phi);

    const std::array<double, 3> &vector() const {
        return n_;
    }
    double theta() const;
    double phi() const;

    /// Columns are |+n> and |-n> in the H/V basis.
    Mat2 eigenbasis() const;
    /// n . (sigma_x, sigma_y, sigma_z) in the H/V basis.
    Mat2 pauli() const;

   private:
    explicit BlochAxis(std::array<double, 3> n) : n_(n) {
    }
    std::array<double, 3> n_{0.0, 0.0, 1.0};
};

/// Normalized state vector in the storage basis.
class PureState {
   public:
    /// Normalizes `amplitudes`; throws InvalidInput on a zero or non-finite vector.
    static PureState from_amplitudes(const Vec4 &amplitudes);
    /// Amplitudes ordered (L,+n), (L,-n), (R,+n), (R,-n).
    static PureState from_axis_amplitudes(const Vec4 &amplitudes, const BlochAxis &axis);

    const Vec4 &amplitudes() const {
        return amplitudes_;
    }
    /// Amplitudes re-expressed in the eigenbasis of `axis`.
    Vec4 axis_amplitudes(const BlochAxis &axis) const;

    Complex inner(const PureState &ket) const {
        return amplitudes_.dot(ket.amplitudes_);
    }

   private:
    explicit PureState(Vec4 a) : amplitudes_(std::move(a)) {
    }
    Vec4 amplitudes_;
};

/// A 4x4 operator on the photon. Whether it is a density matrix or a POVM
/// element is decided by the caller via `validate`.
class SystemOperator {
   public:
    SystemOperator() : m_(Mat4::Zero()) {
    }
    explicit SystemOperator(Mat4 m) : m_(std::move(m)) {
    }

    static SystemOperator identity() {
        return SystemOperator(Mat4::Identity());
    }
    /// |psi><psi|
    static SystemOperator projector(const PureState &psi);

    const Mat4 &matrix() const {
        return m_;
    }
    Complex trace() const {
        return m_.trace();
    }
    double max_abs_entry() const;

    SystemOperator operator*(const SystemOperator &rhs) const {
        return SystemOperator(m_ * rhs.m_);
    }
    SystemOperator operator+(const SystemOperator &rhs) const {
        return SystemOperator(m_ + rhs.m_);
    }
    SystemOperator operator-(const SystemOperator &rhs) const {
        return SystemOperator(m_ - rhs.m_);
    }
    bool operator==(const SystemOperator &rhs) const {
        return m_ == rhs.m_;
    }

   private:
    Mat4 m_;
};

enum class OperatorRole { Density, Povm };

struct OperatorDiagnostics {
    bool ok = true;
    double hermiticity_residual = 0.0;
    double min_eigenvalue = 0.0;
    double max_eigenvalue = 0.0;
    double trace = 0.0;
    double imag_trace = 0.0;
    std::vector<std::string> failures;
};

/// Checks the invariants of `role`. Never throws; failures are listed.
OperatorDiagnostics validate(const SystemOperator &op, OperatorRole role);

/// Throws InvalidInput with the diagnostics' failure list if validation fails.
void require_valid(const SystemOperator &op, OperatorRole role, const std::string &what);

bool is_unitary(const Mat2 &u, double tol = kOperatorTolerance);

/// Beam splitter amplitudes (r, t) followed by local rotations (left, right),
/// acting on an H-polarized photon. The result is in the storage basis.
PureState make_preparation(Complex r, Complex t, const Mat2 &v_left, const Mat2 &v_right);

/// State retrodicted from a horizontally polarized click behind the second
/// splitter: conj(r) V3^dagger |L,H> + conj(t) V4^dagger |R,H>.
PureState make_postselection(Complex r, Complex t, const Mat2 &v_left, const Mat2 &v_right);

/// Some unitary whose first column is the normalized `target`.
Mat2 unitary_completion(const Eigen::Matrix<Complex, 2, 1> &target);

SystemOperator projector_left();
SystemOperator projector_right();
/// Pauli operator along `axis` on the right arm, zero on the left arm.
SystemOperator sigma_r(const BlochAxis &axis);

/// 1 - E_f. The result of complement(identity) is the zero operator, which
/// `validate(.., Povm)` rejects.
SystemOperator complement(const SystemOperator &effect);

/// block-diag(W, W) with W the eigenbasis of `axis`: maps axis-basis
/// coordinates to storage coordinates.
Mat4 axis_change(const BlochAxis &axis);
SystemOperator to_storage_basis(const Mat4 &axis_matrix, const BlochAxis &axis);
Mat4 to_axis_basis(const SystemOperator &op, const BlochAxis &axis);

/// True if the off-diagonal (left-right) blocks vanish within `tol` times the largest entry.
bool is_path_block_diagonal(const SystemOperator &op, double tol = 1e-12);

}  // namespace cheshire

#endif
