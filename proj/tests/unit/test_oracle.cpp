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

#include <cmath>
#include <numbers>
#include <sstream>

#include "cheshire/errors.hpp"
#include "cheshire/indicator.hpp"
#include "gtest/gtest.h"
#include "test_support.hpp"

using namespace cheshire;
using namespace cheshire::oracle;
using cheshire::testkit::MeterKind;
using cheshire::testkit::Rng;

namespace {

PureState state(Complex a, Complex b, Complex c, Complex d) {
    Vec4 v;
    v << a, b, c, d;
    return PureState::from_amplitudes(v);
}

GriddedJoint brute(const Experiment &exp, double spacing = kDefaultSpacing) {
    return brute_force_joint(exp.preparation(), exp.postselection(), exp.axis(),
                             GriddedMeter::gaussian(exp.meter_x(), spacing),
                             GriddedMeter::gaussian(exp.meter_y(), spacing));
}

Experiment random_experiment(Rng &rng, MeterKind kx, MeterKind ky, bool pure) {
    const BlochAxis n = testkit::random_axis(rng);
    const GaussianMeter mx = testkit::random_meter(rng, kx);
    const GaussianMeter my = testkit::random_meter(rng, ky);
    if (pure) {
        return Experiment::pure(testkit::random_pure_state(rng), testkit::random_pure_state(rng), n, mx, my);
    }
    return Experiment(testkit::random_density(rng), testkit::random_effect(rng), n, mx, my);
}

// Orthogonal-pair law from l = <Phi|Pi_L|Psi>, s = <Phi|sigma_R|Psi>, with
// the sign in front of the |l -+ s|^2 terms left open.
double orthogonal_density(Complex l, Complex s, double ex, double ey, double wx, double wy, double sign, double x,
                          double y) {
    const double ll = std::norm(l), ss = std::norm(s), re = (std::conj(l) * s).real();
    auto g = [&](double dx, double dy) { return std::exp(-(ex * ex * dx * dx + ey * ey * dy * dy) / 2.0); };
    double v = ll * g(x - 1, y);
    v += sign * (0.25 * std::norm(l - s) * g(x, y - 1) + 0.25 * std::norm(l + s) * g(x, y + 1));
    v -= wx * wy * ((ll - re) * g(x - 0.5, y - 0.5) + (ll + re) * g(x - 0.5, y + 0.5));
    v += 0.5 * std::pow(wy, 4) * (ll - ss) * g(x, y);
    return ex * ey / (2.0 * std::numbers::pi) * v;
}

}  // namespace

TEST(gridded_meter, gaussian_passes_validation) {
    for (double eps : {0.3, 1.0, 4.0}) {
        const GridDiagnostics d = GriddedMeter::gaussian(GaussianMeter(eps, 2.5 * eps)).validate();
        EXPECT_TRUE(d.ok) << eps;
        EXPECT_NEAR(d.trace, 1.0, 1e-10);
        EXPECT_GE(d.min_window_eigenvalue, -1e-8);
    }
    const GriddedMeter g = GriddedMeter::gaussian(GaussianMeter::pure(1.0));
    EXPECT_EQ(g.unit_shift(), 16);
    EXPECT_LT(g.edge_mass(), 1e-12);
    EXPECT_EQ(g.kernel(0, 5 * g.unit_shift()), 0.0);
    EXPECT_EQ(g.kernel(-1, 0), 0.0);
    EXPECT_DOUBLE_EQ(g.kernel(g.size() / 2, g.size() / 2 + 3), meter_density(GaussianMeter::pure(1.0), 0.0, 3.0 / 16));
}

TEST(gridded_meter, validation_flags_bad_kernels) {
    // not a density: negative eigenvalue and wrong trace
    const GriddedMeter bad = GriddedMeter::from_kernel(
        [](double x, double y) { return std::abs(x - y) < 1e-12 ? 0.2 * std::exp(-x * x) : 0.3 * std::exp(-x * x - y * y); },
        6.0);
    const GridDiagnostics d = bad.validate();
    EXPECT_FALSE(d.ok);
    EXPECT_FALSE(d.failures.empty());
    EXPECT_LT(d.min_window_eigenvalue, -1e-8);

    const GriddedMeter skew = GriddedMeter::from_kernel(
        [](double x, double y) { return std::exp(-(x * x + y * y)) * (1.0 + 0.1 * (x - y)) / std::sqrt(std::numbers::pi / 2); },
        6.0);
    EXPECT_GT(skew.validate().symmetry_residual, 1e-3);
    EXPECT_FALSE(skew.validate().ok);
}

TEST(gridded_meter, spacing_must_divide_unit) {
    EXPECT_THROW(GriddedMeter::gaussian(GaussianMeter::pure(1.0), 0.3), InvalidInput);
    EXPECT_THROW(GriddedMeter::gaussian(GaussianMeter::pure(1.0), -0.5), InvalidInput);
    EXPECT_NO_THROW(GriddedMeter::gaussian(GaussianMeter::pure(1.0), 0.125));
    EXPECT_THROW(GriddedWavefunction::gaussian(GaussianMeter(1.0, 2.0)), InvalidInput);
}

TEST(brute_force_joint, rejects_bad_grids) {
    const Experiment exp = Experiment::pure(state(1, 0, 1, 0), state(1, 1, 1, 1), BlochAxis(), GaussianMeter::pure(1),
                                            GaussianMeter::pure(1));
    const GriddedMeter fine = GriddedMeter::gaussian(exp.meter_x(), 1.0 / 16);
    const GriddedMeter coarse = GriddedMeter::gaussian(exp.meter_x(), 1.0 / 8);
    EXPECT_THROW(brute_force_joint(exp.preparation(), exp.postselection(), exp.axis(), fine, coarse), InvalidInput);

    // a meter cut off at +-3 while it has width 2
    const GaussianMeter wide = GaussianMeter::pure(0.5);
    const GriddedMeter truncated =
        GriddedMeter::from_kernel([&](double x, double y) { return meter_density(wide, x, y); }, 3.0);
    EXPECT_THROW(brute_force_joint(exp.preparation(), exp.postselection(), exp.axis(), truncated, fine), InvalidInput);

    const SystemOperator not_density(Mat4::Identity());
    EXPECT_THROW(brute_force_joint(not_density, exp.postselection(), exp.axis(), fine, fine), InvalidInput);
}

TEST(brute_force_joint, matches_engine_across_regimes) {
    Rng rng(11);
    const MeterKind kinds[] = {MeterKind::Moderate, MeterKind::Strong, MeterKind::WeakIncoherent, MeterKind::Moderate};
    for (int k = 0; k < 8; ++k) {
        const MeterKind kx = kinds[k % 4];
        const MeterKind ky = kinds[(k + 1) % 4];
        const Experiment exp = random_experiment(rng, kx, ky, k % 2 == 0);
        const GriddedJoint gj = brute(exp);
        EXPECT_LE(max_residual(gj, engine_density(exp)), 1e-6) << "case " << k;
        EXPECT_NEAR(gj.mass(Branch::Success) + gj.mass(Branch::Failure), 1.0, 1e-6);
        EXPECT_NEAR(gj.mass(Branch::Success), postselection_probability(exp), 1e-6);
        EXPECT_NEAR(gj.overlap_trace, exp.traces().trace, 1e-12);
    }
}

TEST(brute_force_joint, matches_engine_with_weak_coherent_meter) {
    Rng rng(12);
    const Experiment exp = random_experiment(rng, MeterKind::Moderate, MeterKind::WeakCoherent, false);
    const GriddedJoint gj = brute(exp);
    EXPECT_LE(max_residual(gj, engine_density(exp)), 1e-6);
    EXPECT_NEAR(gj.mass(Branch::Success) + gj.mass(Branch::Failure), 1.0, 1e-6);
}

TEST(brute_force_joint, identity_postselection_empties_failure) {
    Rng rng(13);
    const Experiment exp = random_experiment(rng, MeterKind::Moderate, MeterKind::Moderate, false)
                               .with_postselection(SystemOperator::identity());
    const GriddedJoint gj = brute(exp);
    EXPECT_NEAR(gj.mass(Branch::Success), 1.0, 1e-9);
    EXPECT_NEAR(gj.mass(Branch::Failure), 0.0, 1e-12);
    EXPECT_LE(max_residual(gj, engine_density(exp)), 1e-6);
    EXPECT_GE(gj.min_value(), -1e-12);
}

TEST(brute_force_joint, handles_arbitrary_kernels) {
    // A non-Gaussian meter: mixture of two displaced Gaussians (incoherent).
    // With a product-state preparation and E = Pi_L the law is that kernel's
    // diagonal displaced by one unit along x, times Tr[Pi_L rho].
    const GaussianMeter g = GaussianMeter::pure(1.5);
    const GriddedMeter mix = GriddedMeter::from_kernel(
        [&](double x, double y) { return 0.5 * meter_density(g, x - 0.5, y - 0.5) + 0.5 * meter_density(g, x + 0.5, y + 0.5); },
        10.0);
    ASSERT_TRUE(mix.validate().ok);
    const GriddedMeter my = GriddedMeter::gaussian(GaussianMeter::pure(1.0));
    const PureState psi = state(0.6, 0, 0.8, 0);
    const GriddedJoint gj = brute_force_joint(SystemOperator::projector(psi), projector_left(), BlochAxis(), mix, my);
    double worst = 0.0;
    for (int i = 0; i < gj.count_x; ++i) {
        for (int j = 0; j < gj.count_y; ++j) {
            const double x = gj.x(i) - 1.0, y = gj.y(j);
            const double want = 0.36 * (0.5 * meter_density(g, x - 0.5, x - 0.5) + 0.5 * meter_density(g, x + 0.5, x + 0.5)) *
                                meter_density(GaussianMeter::pure(1.0), y, y);
            worst = std::max(worst, std::abs(gj.at(Branch::Success, i, j) - want));
        }
    }
    EXPECT_LT(worst, 1e-14);
}

TEST(brute_force_joint, no_polarization_coherence_factorizes) {
    // w_y -> 0: the y-meter becomes a classical mixture and the law
    // factorizes into a diagonal-kernel sum.
    const PureState psi = state(1, 1, 1, 0), phi = state(1, 0, 1, 1);
    const Experiment exp = Experiment::pure(psi, phi, BlochAxis(), GaussianMeter(1.0, 1.2), GaussianMeter(1.0, 60.0));
    const GriddedJoint gj = brute(exp);
    EXPECT_LE(max_residual(gj, engine_density(exp)), 1e-6);
}

TEST(explicit_unitary_joint, agrees_with_brute_force_for_pure_states) {
    Rng rng(14);
    for (int k = 0; k < 4; ++k) {
        const GaussianMeter mx = GaussianMeter::pure(testkit::uniform(rng, 0.5, 3.0));
        const GaussianMeter my = GaussianMeter::pure(testkit::uniform(rng, 0.5, 3.0));
        const PureState psi = testkit::random_pure_state(rng), phi = testkit::random_pure_state(rng);
        const BlochAxis n = testkit::random_axis(rng);
        const Experiment exp = Experiment::pure(psi, phi, n, mx, my);
        const GriddedJoint a = brute(exp);
        const GriddedJoint b = explicit_unitary_joint(psi, phi, n, GriddedWavefunction::gaussian(mx), GriddedWavefunction::gaussian(my));
        ASSERT_EQ(a.count_x, b.count_x);
        ASSERT_EQ(a.count_y, b.count_y);
        ASSERT_EQ(a.first_x, b.first_x);
        double worst = 0.0;
        for (std::size_t c = 0; c < a.success.size(); ++c) {
            worst = std::max({worst, std::abs(a.success[c] - b.success[c]), std::abs(a.failure[c] - b.failure[c])});
        }
        EXPECT_LT(worst, 1e-12) << k;
        EXPECT_GE(b.min_value(), -1e-14);
    }
}

TEST(oracle_moments, anomalous_grin) {
    const Experiment exp = Experiment::pure(state(2, 2, 3, -2), state(1, 1, 1, 1), BlochAxis(), GaussianMeter::pure(20),
                                            GaussianMeter::pure(0.05));
    const MomentReport m = oracle_moments(brute(exp));
    EXPECT_NEAR(m.mean_x, 16.0 / 17.0, 1e-2);
    EXPECT_NEAR(m.mean_y, 5.0 / 17.0, 1e-2);
    EXPECT_NEAR(m.p_postselect, 17.0 / 84.0, 1e-2);
}

TEST(oracle_moments, agree_with_engine_at_unit_strength) {
    Rng rng(15);
    for (int k = 0; k < 3; ++k) {
        const Experiment exp = Experiment(testkit::random_density(rng), testkit::random_effect(rng), testkit::random_axis(rng),
                                          GaussianMeter(1.0, 1.5), GaussianMeter::pure(1.0));
        const MomentReport a = oracle_moments(brute(exp));
        const MomentReport b = moments(exp);
        EXPECT_NEAR(a.mean_x, b.mean_x, 1e-6);
        EXPECT_NEAR(a.mean_y, b.mean_y, 1e-6);
        EXPECT_NEAR(a.cross_xy, b.cross_xy, 1e-6);
        EXPECT_NEAR(a.cross_xy2, b.cross_xy2, 1e-6);
        EXPECT_NEAR(a.p_postselect, b.p_postselect, 1e-9);
        EXPECT_NEAR(a.norm_N, b.norm_N, 1e-6);
    }
}

TEST(oracle_moments, single_gaussian) {
    // Photon surely in the left arm, no post-selection: the meter moves by (1, 0).
    const Experiment exp = Experiment::pure(state(1, 0, 0, 0), state(1, 0, 0, 0), BlochAxis(), GaussianMeter::pure(1.0),
                                            GaussianMeter::pure(1.0))
                               .with_postselection(SystemOperator::identity());
    const MomentReport m = oracle_moments(brute(exp));
    EXPECT_NEAR(m.mean_x, 1.0, 1e-12);
    EXPECT_NEAR(m.mean_y, 0.0, 1e-12);
    EXPECT_NEAR(m.cross_xy, 0.0, 1e-12);
}

TEST(oracle_moments, empty_branch_throws) {
    GriddedJoint gj;
    gj.count_x = gj.count_y = 2;
    gj.success.assign(4, 0.0);
    gj.failure.assign(4, 0.25);
    EXPECT_THROW(oracle_moments(gj), ZeroPostselection);
}

TEST(orthogonal_pair, brute_force_settles_the_sign) {
    // Psi = (|L,+> + |R,+>)/sqrt2, Phi = (-|L,+> + |R,+>)/sqrt2: l = -1/2, s = 1/2,
    // so |l - s|^2 = 1 and |l + s|^2 = 0 and only the sign separates the two readings.
    const PureState psi = state(1, 0, 1, 0), phi = state(-1, 0, 1, 0);
    const GaussianMeter mx = GaussianMeter::pure(1.2), my = GaussianMeter::pure(0.9);
    const Experiment exp = Experiment::pure(psi, phi, BlochAxis(), mx, my);
    const GriddedJoint gj = brute(exp);
    const Complex l(-0.5), s(0.5);
    const double wx = exp.w_x(), wy = exp.w_y();
    double plus = 0.0, minus = 0.0;
    for (int i = 0; i < gj.count_x; ++i) {
        for (int j = 0; j < gj.count_y; ++j) {
            const double got = gj.at(Branch::Success, i, j);
            plus = std::max(plus, std::abs(got - orthogonal_density(l, s, 1.2, 0.9, wx, wy, +1.0, gj.x(i), gj.y(j))));
            minus = std::max(minus, std::abs(got - orthogonal_density(l, s, 1.2, 0.9, wx, wy, -1.0, gj.x(i), gj.y(j))));
        }
    }
    EXPECT_LT(plus, 1e-12);
    EXPECT_GT(minus, 1e-2);
    // P = 2(1 - w_x w_y)|l|^2 - (1 - w_y^4)(|l|^2 - |s|^2)/2
    EXPECT_NEAR(gj.mass(Branch::Success), 0.5 * (1.0 - wx * wy), 1e-9);
    EXPECT_TRUE(std::isinf(oracle_moments(gj).norm_N));
}

TEST(max_residual, detects_a_corrupted_reference) {
    Rng rng(16);
    const Experiment exp = random_experiment(rng, MeterKind::Moderate, MeterKind::Moderate, true);
    const GriddedJoint gj = brute(exp);
    const BranchDensity good = engine_density(exp);
    const BranchDensity bad = [&](Branch b, double x, double y) { return good(b, x, y) * 1.001; };
    EXPECT_LE(max_residual(gj, good), 1e-6);
    EXPECT_GT(max_residual(gj, bad), 1e-6);
    EXPECT_EQ(max_residual(gj, good, 1), max_residual(gj, good, 3));
}

TEST(write_joint_csv, layout) {
    GriddedJoint gj;
    gj.first_x = -1;
    gj.count_x = 2;
    gj.first_y = 0;
    gj.count_y = 1;
    gj.spacing = 0.5;
    gj.success = {0.25, 0.5};
    gj.failure = {0.0, 0.125};
    std::ostringstream out;
    write_joint_csv(out, gj);
    EXPECT_EQ(out.str(),
              "x,y,branch,probability\n"
              "-0.5,0,success,0.25\n0,0,success,0.5\n-0.5,0,failure,0\n0,0,failure,0.125\n");
}
