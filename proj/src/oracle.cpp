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

#include "cheshire/oracle.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <limits>
#include <optional>
#include <numbers>
#include <ostream>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "cheshire/errors.hpp"
#include "cheshire/parallel.hpp"
#include "cheshire/sampler.hpp"

namespace cheshire::oracle {

namespace {

constexpr double kMaxEdgeMass = 1e-10;

int unit_shift_for(double spacing) {
    if (!(spacing > 0.0) || !std::isfinite(spacing)) {
        throw InvalidInput("grid spacing must be positive");
    }
    const double per_unit = 1.0 / spacing;
    const double rounded = std::round(per_unit);
    if (rounded < 1.0 || std::abs(per_unit - rounded) > 1e-9 * per_unit) {
        std::ostringstream msg;
        msg << "grid spacing " << spacing << " does not divide the unit pointer shift";
        throw InvalidInput(msg.str());
    }
    return static_cast<int>(rounded);
}

int half_count(double half_range, double spacing) {
    return static_cast<int>(std::ceil(half_range / spacing - 1e-9));
}

// Displacements of the three coupling branches {Pi_L, Pi_R+, Pi_R-}, in units.
constexpr std::array<int, 3> kShiftX{1, 0, 0};
constexpr std::array<int, 3> kShiftY{0, 1, -1};

std::array<Mat4, 3> coupling_projectors(const BlochAxis &axis) {
    const Mat4 right = projector_right().matrix();
    const Mat4 sigma = sigma_r(axis).matrix();
    return {projector_left().matrix(), 0.5 * (right + sigma), 0.5 * (right - sigma)};
}

// B[k][k'] = Tr[E S_k rho S_k'].
std::array<std::array<Complex, 3>, 3> branch_weights(const Mat4 &effect, const Mat4 &rho, const BlochAxis &axis) {
    const auto s = coupling_projectors(axis);
    std::array<std::array<Complex, 3>, 3> b{};
    for (int k = 0; k < 3; ++k) {
        for (int kp = 0; kp < 3; ++kp) {
            b[k][kp] = (effect * s[k] * rho * s[kp]).trace();
        }
    }
    return b;
}

// rho(x_i - d, x_i - d') along one axis for every node i.
std::vector<double> shifted_kernel(const GriddedMeter &m, int d, int dp) {
    std::vector<double> out(m.size());
    const int u = m.unit_shift();
    for (int i = 0; i < m.size(); ++i) {
        out[i] = m.kernel(i - d * u, i - dp * u);
    }
    return out;
}

}  // namespace

GriddedMeter::GriddedMeter(int first, int count, double spacing, int unit)
    : first_(first), count_(count), spacing_(spacing), unit_(unit), band_(2 * unit) {
    values_.assign(static_cast<std::size_t>(count_) * (2 * band_ + 1), 0.0);
}

GriddedMeter GriddedMeter::from_kernel(const std::function<double(double, double)> &kernel, double half_range,
                                       double spacing) {
    const int unit = unit_shift_for(spacing);
    if (!(half_range > 0.0) || !std::isfinite(half_range)) {
        throw InvalidInput("grid half-range must be positive");
    }
    const int half = half_count(half_range, spacing);
    GriddedMeter g(-half, 2 * half + 1, spacing, unit);
    const int width = 2 * g.band_ + 1;
    for (int i = 0; i < g.count_; ++i) {
        for (int off = -g.band_; off <= g.band_; ++off) {
            const int j = i + off;
            if (j < 0 || j >= g.count_) {
                continue;
            }
            g.values_[static_cast<std::size_t>(i) * width + (off + g.band_)] = kernel(g.node(i), g.node(j));
        }
    }
    return g;
}

GriddedMeter GriddedMeter::gaussian(const GaussianMeter &meter, double spacing) {
    return from_kernel([&meter](double x, double xp) { return meter_density(meter, x, xp); },
                       8.0 / meter.epsilon() + 2.0, spacing);
}

double GriddedMeter::kernel(int i, int j) const {
    const int off = j - i;
    if (i < 0 || i >= count_ || j < 0 || j >= count_ || off < -band_ || off > band_) {
        return 0.0;
    }
    return values_[static_cast<std::size_t>(i) * (2 * band_ + 1) + (off + band_)];
}

double GriddedMeter::trace() const {
    double s = 0.0;
    for (int i = 0; i < count_; ++i) {
        s += kernel(i, i);
    }
    return s * spacing_;
}

double GriddedMeter::edge_mass() const {
    const int edge = std::min(count_, 2 * unit_);
    double s = 0.0;
    for (int i = 0; i < edge; ++i) {
        s += std::abs(kernel(i, i)) + std::abs(kernel(count_ - 1 - i, count_ - 1 - i));
    }
    const double t = trace();
    return t > 0.0 ? s * spacing_ / t : std::numeric_limits<double>::infinity();
}

GridDiagnostics GriddedMeter::validate() const {
    GridDiagnostics d;
    double max_entry = 0.0;
    for (int i = 0; i < count_; ++i) {
        for (int j = std::max(0, i - band_); j <= std::min(count_ - 1, i + band_); ++j) {
            d.symmetry_residual = std::max(d.symmetry_residual, std::abs(kernel(i, j) - kernel(j, i)));
            max_entry = std::max(max_entry, std::abs(kernel(i, j)));
        }
    }
    d.trace = trace();

    // Principal submatrices of a positive kernel are positive; any two of
    // band + 1 consecutive nodes are within the stored band.
    const int window = std::min(count_, band_ + 1);
    const int stride = std::max(1, window / 2);
    d.min_window_eigenvalue = std::numeric_limits<double>::infinity();
    for (int start = 0;; start += stride) {
        start = std::min(start, count_ - window);
        Eigen::MatrixXd block(window, window);
        for (int a = 0; a < window; ++a) {
            for (int b = 0; b < window; ++b) {
                block(a, b) = 0.5 * (kernel(start + a, start + b) + kernel(start + b, start + a));
            }
        }
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(block, Eigen::EigenvaluesOnly);
        d.min_window_eigenvalue = std::min(d.min_window_eigenvalue, solver.eigenvalues().minCoeff());
        if (start + window >= count_) {
            break;
        }
    }

    if (d.symmetry_residual > 1e-12 * std::max(max_entry, 1.0)) {
        d.failures.push_back("kernel is not symmetric");
    }
    if (std::abs(d.trace - 1.0) > 1e-10) {
        d.failures.push_back("kernel trace " + std::to_string(d.trace) + " differs from 1");
    }
    if (d.min_window_eigenvalue < -1e-8) {
        d.failures.push_back("kernel is not positive semidefinite");
    }
    d.ok = d.failures.empty();
    return d;
}

GriddedWavefunction GriddedWavefunction::gaussian(const GaussianMeter &meter, double spacing) {
    if (!meter.is_pure()) {
        throw InvalidInput("a wavefunction exists only for a pure meter (epsilon == epsilon_tilde)");
    }
    unit_shift_for(spacing);
    const int half = half_count(8.0 / meter.epsilon() + 2.0, spacing);
    const double e = meter.epsilon();
    const double amplitude = std::pow(e * e / (2.0 * std::numbers::pi), 0.25);
    GriddedWavefunction w{-half, spacing, std::vector<Complex>(2 * half + 1)};
    for (int i = 0; i < 2 * half + 1; ++i) {
        const double x = (i - half) * spacing;
        w.values[i] = amplitude * std::exp(-e * e * x * x / 4.0);
    }
    return w;
}

double GriddedJoint::mass(Branch b) const {
    const auto &v = b == Branch::Success ? success : failure;
    long double s = 0.0L;
    for (double p : v) {
        s += p;
    }
    return static_cast<double>(s) * spacing * spacing;
}

double GriddedJoint::min_value() const {
    double m = std::numeric_limits<double>::infinity();
    for (double p : success) {
        m = std::min(m, p);
    }
    for (double p : failure) {
        m = std::min(m, p);
    }
    return m;
}

GriddedJoint brute_force_joint(const SystemOperator &rho, const SystemOperator &effect, const BlochAxis &axis,
                               const GriddedMeter &meter_x, const GriddedMeter &meter_y) {
    require_valid(rho, OperatorRole::Density, "preparation");
    require_valid(effect, OperatorRole::Povm, "post-selection");
    if (std::abs(meter_x.spacing() - meter_y.spacing()) > 1e-15) {
        throw InvalidInput("meter grids must share one spacing");
    }
    for (const GriddedMeter *m : {&meter_x, &meter_y}) {
        const double edge = m->edge_mass();
        if (!(edge <= kMaxEdgeMass)) {
            std::ostringstream msg;
            msg << "meter grid does not cover the support: mass " << edge << " within two units of the edge";
            throw InvalidInput(msg.str());
        }
    }

    const Mat4 e = effect.matrix();
    const Mat4 e_fail = Mat4::Identity() - e;
    const auto b_success = branch_weights(e, rho.matrix(), axis);
    const auto b_failure = branch_weights(e_fail, rho.matrix(), axis);

    // Kernels are real and symmetric, so the (k, k') and (k', k) terms
    // combine into 2 Re(B_kk') and only Re(B) survives the double sum.
    std::array<std::array<std::vector<double>, 3>, 3> kx;
    std::array<std::array<std::vector<double>, 3>, 3> ky;
    for (int k = 0; k < 3; ++k) {
        for (int kp = 0; kp < 3; ++kp) {
            kx[k][kp] = shifted_kernel(meter_x, kShiftX[k], kShiftX[kp]);
            ky[k][kp] = shifted_kernel(meter_y, kShiftY[k], kShiftY[kp]);
        }
    }

    GriddedJoint gj;
    gj.first_x = meter_x.first_index();
    gj.count_x = meter_x.size();
    gj.first_y = meter_y.first_index();
    gj.count_y = meter_y.size();
    gj.spacing = meter_x.spacing();
    gj.overlap_trace = (e * rho.matrix()).trace().real();
    const std::size_t n = static_cast<std::size_t>(gj.count_x) * gj.count_y;
    gj.success.assign(n, 0.0);
    gj.failure.assign(n, 0.0);

    detail::parallel_for(gj.count_x, default_thread_count(), [&](std::uint64_t begin, std::uint64_t end) {
        for (auto i = static_cast<int>(begin); i < static_cast<int>(end); ++i) {
            for (int k = 0; k < 3; ++k) {
                for (int kp = 0; kp < 3; ++kp) {
                    const double fx = kx[k][kp][i];
                    if (fx == 0.0) {
                        continue;
                    }
                    const double ws = b_success[k][kp].real() * fx;
                    const double wf = b_failure[k][kp].real() * fx;
                    const std::vector<double> &fy = ky[k][kp];
                    double *row_s = gj.success.data() + static_cast<std::size_t>(i) * gj.count_y;
                    double *row_f = gj.failure.data() + static_cast<std::size_t>(i) * gj.count_y;
                    for (int j = 0; j < gj.count_y; ++j) {
                        row_s[j] += ws * fy[j];
                        row_f[j] += wf * fy[j];
                    }
                }
            }
        }
    });
    return gj;
}

GriddedJoint explicit_unitary_joint(const PureState &psi, const PureState &phi, const BlochAxis &axis,
                                    const GriddedWavefunction &meter_x, const GriddedWavefunction &meter_y) {
    if (std::abs(meter_x.spacing - meter_y.spacing) > 1e-15) {
        throw InvalidInput("meter grids must share one spacing");
    }
    const int u = unit_shift_for(meter_x.spacing);
    const Vec4 left = projector_left().matrix() * psi.amplitudes();
    const Vec4 right = projector_right().matrix() * psi.amplitudes();
    const Vec4 polar = sigma_r(axis).matrix() * psi.amplitudes();
    const Vec4 &bra = phi.amplitudes();

    GriddedJoint gj;
    gj.first_x = meter_x.first;
    gj.count_x = static_cast<int>(meter_x.values.size());
    gj.first_y = meter_y.first;
    gj.count_y = static_cast<int>(meter_y.values.size());
    gj.spacing = meter_x.spacing;
    gj.overlap_trace = std::norm(bra.dot(psi.amplitudes()));
    const std::size_t n = static_cast<std::size_t>(gj.count_x) * gj.count_y;
    gj.success.assign(n, 0.0);
    gj.failure.assign(n, 0.0);

    for (int i = 0; i < gj.count_x; ++i) {
        const int ix = i + gj.first_x;
        // exp(i P) translates by +1: (exp(iP) f)(x) = f(x - 1).
        const Complex shifted_x = meter_x.at(ix - u);
        const Complex plain_x = meter_x.at(ix);
        for (int j = 0; j < gj.count_y; ++j) {
            const int iy = j + gj.first_y;
            const Complex up = meter_y.at(iy - u);
            const Complex down = meter_y.at(iy + u);
            const Complex plain_y = meter_y.at(iy);
            const Complex cos_y = 0.5 * (up + down);
            const Complex isin_y = 0.5 * (up - down);
            const Vec4 out = left * (shifted_x * plain_y) + right * (plain_x * cos_y) + polar * (plain_x * isin_y);
            const double total = out.squaredNorm();
            const double kept = std::norm(bra.dot(out));
            gj.success[static_cast<std::size_t>(i) * gj.count_y + j] = kept;
            gj.failure[static_cast<std::size_t>(i) * gj.count_y + j] = total - kept;
        }
    }
    return gj;
}

MomentReport oracle_moments(const GriddedJoint &gj) {
    long double m0 = 0.0L, mx = 0.0L, my = 0.0L, mxy = 0.0L, mxy2 = 0.0L;
    for (int i = 0; i < gj.count_x; ++i) {
        const double x = gj.x(i);
        for (int j = 0; j < gj.count_y; ++j) {
            const double y = gj.y(j);
            const double p = gj.at(Branch::Success, i, j);
            m0 += p;
            mx += p * x;
            my += p * y;
            mxy += p * x * y;
            mxy2 += p * x * y * y;
        }
    }
    const double area = gj.spacing * gj.spacing;
    const double mass = static_cast<double>(m0) * area;
    if (!(mass > kZeroPostselection)) {
        throw ZeroPostselection("oracle: the success branch carries no mass");
    }
    MomentReport r;
    r.mean_x = static_cast<double>(mx / m0);
    r.mean_y = static_cast<double>(my / m0);
    r.cross_xy = static_cast<double>(mxy / m0);
    r.cross_xy2 = static_cast<double>(mxy2 / m0);
    r.p_postselect = mass;
    r.norm_N = gj.overlap_trace > 0.0 ? mass / gj.overlap_trace : std::numeric_limits<double>::infinity();
    return r;
}

double max_residual(const GriddedJoint &gj, const BranchDensity &reference, unsigned threads) {
    if (threads == 0) {
        threads = default_thread_count();
    }
    std::vector<double> row_max(gj.count_x, 0.0);
    detail::parallel_for(gj.count_x, threads, [&](std::uint64_t begin, std::uint64_t end) {
        for (auto i = static_cast<int>(begin); i < static_cast<int>(end); ++i) {
            double worst = 0.0;
            const double x = gj.x(i);
            for (int j = 0; j < gj.count_y; ++j) {
                const double y = gj.y(j);
                worst = std::max(worst, std::abs(gj.at(Branch::Success, i, j) - reference(Branch::Success, x, y)));
                worst = std::max(worst, std::abs(gj.at(Branch::Failure, i, j) - reference(Branch::Failure, x, y)));
            }
            row_max[i] = worst;
        }
    });
    return row_max.empty() ? 0.0 : *std::max_element(row_max.begin(), row_max.end());
}

BranchDensity engine_density(const Experiment &exp) {
    // branch_mixture(e).evaluate == joint_density(e) * postselection_probability(e)
    const SignedMixture success = branch_mixture(exp);
    std::optional<SignedMixture> failure;
    try {
        failure = branch_mixture(exp.with_postselection(complement(exp.postselection())));
    } catch (const ZeroPostselection &) {
    } catch (const InvalidInput &) {
    }
    return [success, failure](Branch b, double x, double y) {
        if (b == Branch::Success) {
            return success.evaluate(x, y);
        }
        return failure ? failure->evaluate(x, y) : 0.0;
    };
}

void write_joint_csv(std::ostream &out, const GriddedJoint &gj) {
    out << "x,y,branch,probability\n";
    char line[160];
    for (Branch b : {Branch::Success, Branch::Failure}) {
        const char *name = b == Branch::Success ? "success" : "failure";
        for (int i = 0; i < gj.count_x; ++i) {
            for (int j = 0; j < gj.count_y; ++j) {
                std::snprintf(line, sizeof line, "%.17g,%.17g,%s,%.17g\n", gj.x(i), gj.y(j), name, gj.at(b, i, j));
                out << line;
            }
        }
    }
}

}  // namespace cheshire::oracle
