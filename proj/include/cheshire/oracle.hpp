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

// Brute-force reference for the readout law, built from the Born rule on a
// uniform grid and independent of the closed forms in statistics.hpp.
//
// The coupling exp[i(P_X Pi_L + P_Y sigma_R)] in normalized units is
//   sum_k T_k (x) S_k,   S = {Pi_L, (Pi_R + sigma_R)/2, (Pi_R - sigma_R)/2},
// with T_k translating the meters by d = {(1, 0), (0, +1), (0, -1)}. Hence
//   P{E, x, y} = sum_{k,k'} Tr[E S_k rho S_k'] rho_X(x - dx_k, x - dx_k') rho_Y(y - dy_k, y - dy_k')
// for arbitrary meter kernels. Shifts are index offsets, so the grid spacing
// must divide 1.

#ifndef CHESHIRE_ORACLE_HPP
#define CHESHIRE_ORACLE_HPP

#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "cheshire/hilbert.hpp"
#include "cheshire/meters.hpp"
#include "cheshire/statistics.hpp"

namespace cheshire::oracle {

inline constexpr double kDefaultSpacing = 1.0 / 16.0;

struct GridDiagnostics {
    bool ok = true;
    double symmetry_residual = 0.0;
    double trace = 0.0;
    /// Smallest eigenvalue over contiguous principal windows of the kernel.
    double min_window_eigenvalue = 0.0;
    std::vector<std::string> failures;
};

/// Real symmetric meter kernel rho(x_i, x_j) on nodes x_i = (first + i) h.
/// Only |x_i - x_j| <= 2 is stored: the coupling never reaches further.
class GriddedMeter {
   public:
    /// Nodes cover +-half_range; `kernel` is evaluated inside the band.
    static GriddedMeter from_kernel(const std::function<double(double, double)> &kernel, double half_range,
                                    double spacing = kDefaultSpacing);
    /// Gaussian meter on +-(8/eps + 2).
    static GriddedMeter gaussian(const GaussianMeter &meter, double spacing = kDefaultSpacing);

    int first_index() const {
        return first_;
    }
    int size() const {
        return count_;
    }
    double spacing() const {
        return spacing_;
    }
    /// Nodes per unit readout shift.
    int unit_shift() const {
        return unit_;
    }
    double node(int i) const {
        return (first_ + i) * spacing_;
    }
    /// Zero outside the grid or the stored band.
    double kernel(int i, int j) const;
    /// h sum_i rho(x_i, x_i)
    double trace() const;
    /// Fraction of the diagonal mass within two units of either edge.
    double edge_mass() const;

    /// Symmetry, unit trace (1e-10) and positivity (-1e-8) of the kernel.
    GridDiagnostics validate() const;

   private:
    GriddedMeter(int first, int count, double spacing, int unit);

    int first_;
    int count_;
    double spacing_;
    int unit_;
    int band_;
    std::vector<double> values_;
};

/// Pure meter wavefunction on a uniform grid, for the explicit-unitary check.
struct GriddedWavefunction {
    int first;
    double spacing;
    std::vector<Complex> values;

    Complex at(int i) const {
        const int k = i - first;
        return k >= 0 && k < static_cast<int>(values.size()) ? values[k] : Complex(0.0);
    }
    /// Requires a pure meter; nodes cover +-(8/eps + 2).
    static GriddedWavefunction gaussian(const GaussianMeter &meter, double spacing = kDefaultSpacing);
};

enum class Branch { Success, Failure };

/// P{f, x_i, y_j} for both outcomes f in {E_f, 1 - E_f}, as densities in (x, y).
struct GriddedJoint {
    int first_x = 0;
    int count_x = 0;
    int first_y = 0;
    int count_y = 0;
    double spacing = kDefaultSpacing;
    /// Tr[E_f rho_i]
    double overlap_trace = 0.0;
    std::vector<double> success;
    std::vector<double> failure;

    double x(int i) const {
        return (first_x + i) * spacing;
    }
    double y(int j) const {
        return (first_y + j) * spacing;
    }
    double at(Branch b, int i, int j) const {
        return (b == Branch::Success ? success : failure)[static_cast<std::size_t>(i) * count_y + j];
    }
    /// h^2 times the sum over the branch.
    double mass(Branch b) const;
    /// Most negative entry over both branches.
    double min_value() const;
};

/// Throws InvalidInput for invalid operators, mismatched or incommensurate
/// spacing, or meters whose mass within two units of a grid edge exceeds 1e-10.
GriddedJoint brute_force_joint(const SystemOperator &rho, const SystemOperator &effect, const BlochAxis &axis,
                               const GriddedMeter &meter_x, const GriddedMeter &meter_y);

/// Same law for pure states, obtained by applying
///   exp(i P_X) Pi_L + cos(P_Y) Pi_R + i sin(P_Y) sigma_R
/// to the discretized wavefunctions and projecting on Phi and its complement.
GriddedJoint explicit_unitary_joint(const PureState &psi, const PureState &phi, const BlochAxis &axis,
                                    const GriddedWavefunction &meter_x, const GriddedWavefunction &meter_y);

/// Grid sums over the success branch, normalized by its mass. Throws
/// ZeroPostselection if the branch is empty.
MomentReport oracle_moments(const GriddedJoint &gj);

/// Reference density for branch b at (x, y).
using BranchDensity = std::function<double(Branch, double, double)>;

/// max |gj - reference| over both branches and every node.
double max_residual(const GriddedJoint &gj, const BranchDensity &reference, unsigned threads = 0);

/// The analytic engine as a BranchDensity: joint_density x P{E_f} for the
/// success branch, the same on 1 - E_f for the failure branch (zero if that
/// branch cannot occur).
BranchDensity engine_density(const Experiment &exp);

/// Columns: x, y, branch (success/failure), probability.
void write_joint_csv(std::ostream &out, const GriddedJoint &gj);

}  // namespace cheshire::oracle

#endif
