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

#include "cheshire/statistics.hpp"

#include <cmath>
#include <numbers>

#include "cheshire/errors.hpp"
#include "gtest/gtest.h"
#include "test_support.hpp"

using namespace cheshire;
using cheshire::testkit::Quadrature;
using cheshire::testkit::Rng;

namespace {

PureState state(Complex a, Complex b, Complex c, Complex d) {
    Vec4 v;
    v << a, b, c, d;
    return PureState::from_amplitudes(v);
}

const PureState kGrinPsi = state(2, 2, 3, -2);
const PureState kGrinPhi = state(1, 1, 1, 1);

Experiment random_experiment(Rng &rng, bool pure) {
    const BlochAxis n = testkit::random_axis(rng);
    const GaussianMeter mx = testkit::random_moderate_meter(rng);
    const GaussianMeter my = testkit::random_moderate_meter(rng);
    if (pure) {
        return Experiment::pure(testkit::random_pure_state(rng), testkit::random_pure_state(rng), n, mx, my);
    }
    return Experiment(testkit::random_density(rng), testkit::random_effect(rng), n, mx, my);
}

struct Rules {
    Quadrature x;
    Quadrature y;
};

Rules rules_for(const Experiment &exp) {
    return {testkit::readout_rule(exp.meter_x().epsilon(), 0.0, 1.0),
            testkit::readout_rule(exp.meter_y().epsilon(), -1.0, 1.0)};
}

template <typename F>
double integrate_2d(const Rules &r, F f) {
    double s = 0.0;
    for (std::size_t i = 0; i < r.x.nodes.size(); ++i) {
        double row = 0.0;
        for (std::size_t j = 0; j < r.y.nodes.size(); ++j) {
            row += r.y.weights[j] * f(r.x.nodes[i], r.y.nodes[j]);
        }
        s += r.x.weights[i] * row;
    }
    return s;
}

/// Exactly orthogonal pure pair: Psi is Gram-Schmidt'ed against Phi.
std::pair<PureState, PureState> orthogonal_pair(Rng &rng) {
    const PureState phi = testkit::random_pure_state(rng);
    Vec4 v = testkit::random_vector(rng);
    v -= phi.amplitudes() * phi.amplitudes().dot(v);
    v -= phi.amplitudes() * phi.amplitudes().dot(v);
    return {PureState::from_amplitudes(v), phi};
}

// Orthogonal-pair statistics written directly from the closed forms in terms
// of l = <Phi|Pi_L|Psi> and s = <Phi|sigma_R|Psi>. The interference term
// ~ |l -+ s|^2 enters with a plus sign (see the ledger).
struct OrthogonalOracle {
    Complex l;
    Complex s;
    double ex, ey, wx, wy;

    double p() const {
        return 2.0 * (1.0 - wx * wy) * std::norm(l) - 0.5 * (1.0 - std::pow(wy, 4)) * (std::norm(l) - std::norm(s));
    }
    double re_ls() const {
        return (std::conj(l) * s).real();
    }
    double density(double x, double y) const {
        auto g = [&](double dx, double dy) { return std::exp(-(ex * ex * dx * dx + ey * ey * dy * dy) / 2.0); };
        double v = std::norm(l) * g(x - 1, y);
        v += 0.25 * std::norm(l - s) * g(x, y - 1) + 0.25 * std::norm(l + s) * g(x, y + 1);
        v -= wx * wy * ((std::norm(l) - re_ls()) * g(x - 0.5, y - 0.5) + (std::norm(l) + re_ls()) * g(x - 0.5, y + 0.5));
        v += 0.5 * std::pow(wy, 4) * (std::norm(l) - std::norm(s)) * g(x, y);
        return ex * ey / (2.0 * std::numbers::pi * p()) * v;
    }
    double mean_x() const {
        return (1.0 - wx * wy) * std::norm(l) / p();
    }
    double mean_y() const {
        return -(1.0 - wx * wy) * re_ls() / p();
    }
    double cross_xy() const {
        return 0.5 * wx * wy * re_ls() / p();
    }
};

}  // namespace

TEST(normalization, unit_at_full_coherence) {
    Rng rng(1);
    for (int k = 0; k < 10; ++k) {
        const Experiment exp = random_experiment(rng, false);
        EXPECT_NEAR(normalization(exp.weak_values(), 1.0, 1.0), 1.0, 1e-14);
    }
    EXPECT_THROW(normalization(WeakValueSet{}, 0.0, 1.0), InvalidInput);
}

TEST(normalization, anomalous_grin_limits) {
    const WeakValueSet w = weak_values_pure(kGrinPsi, kGrinPhi, BlochAxis());
    EXPECT_NEAR(normalization(w, 1e-200, 1.0), 17.0 / 25.0, 1e-14);
    EXPECT_NEAR(normalization(w, 1e-200, 1e-200), 29.0 / 25.0, 1e-14);
}

TEST(postselection_probability, anomalous_grin) {
    const Experiment weak_grin = Experiment::pure(kGrinPsi, kGrinPhi, BlochAxis(), GaussianMeter::pure(80), GaussianMeter::pure(1e-9));
    EXPECT_NEAR(postselection_probability(weak_grin), 17.0 / 84.0, 1e-14);
    const Experiment strong_grin = weak_grin.with_meters(GaussianMeter::pure(80), GaussianMeter::pure(80));
    EXPECT_NEAR(postselection_probability(strong_grin), 29.0 / 84.0, 1e-14);
}

TEST(postselection_probability, identity_and_complement) {
    Rng rng(2);
    for (int k = 0; k < 50; ++k) {
        const Experiment exp = random_experiment(rng, k % 2 == 0);
        const Experiment all = exp.with_postselection(SystemOperator::identity());
        EXPECT_NEAR(postselection_probability(all), 1.0, 1e-14);
        const double p = postselection_probability(exp);
        const double q = postselection_probability(exp.with_postselection(complement(exp.postselection())));
        EXPECT_GT(p, 0.0);
        EXPECT_LE(p, 1.0 + 1e-14);
        EXPECT_NEAR(p + q, 1.0, 1e-13);
    }
}

TEST(experiment, rejects_impossible_postselection) {
    const PureState lp = state(1, 0, 0, 0);
    const PureState rp = state(0, 0, 1, 0);
    // A photon that never left the left arm cannot be found on the right.
    EXPECT_THROW(Experiment::pure(lp, rp, BlochAxis(), GaussianMeter::pure(1), GaussianMeter::pure(1)), ZeroPostselection);
    EXPECT_THROW(Experiment(SystemOperator(2.0 * Mat4::Identity()), SystemOperator::identity(), BlochAxis(),
                            GaussianMeter::pure(1), GaussianMeter::pure(1)),
                 InvalidInput);
}

TEST(joint_density, integrates_to_one) {
    Rng rng(3);
    for (int k = 0; k < 50; ++k) {
        const Experiment exp = random_experiment(rng, k % 2 == 0);
        const SignedMixture mix = branch_mixture(exp);
        const double p = postselection_probability(exp);
        EXPECT_NEAR(mix.total_weight(), p, 1e-14);
        const double mass = integrate_2d(rules_for(exp), [&](double x, double y) { return joint_density(exp, x, y); });
        EXPECT_NEAR(mass, 1.0, 1e-8);
    }
}

TEST(joint_density, single_gaussian_for_left_photon) {
    const Experiment exp = Experiment::pure(state(1, 0, 0, 0), state(1, 0, 0, 0), BlochAxis(), GaussianMeter(0.7, 1.1),
                                            GaussianMeter(1.3, 2.0))
                               .with_postselection(SystemOperator::identity());
    for (double x : {-1.0, 0.3, 1.0, 2.2}) {
        for (double y : {-0.5, 0.0, 0.9}) {
            const double want = 0.7 * 1.3 / (2 * std::numbers::pi) *
                                std::exp(-0.5 * (0.49 * (x - 1) * (x - 1) + 1.69 * y * y));
            EXPECT_NEAR(joint_density(exp, x, y), want, 1e-15);
        }
    }
    const Complex z = char_function(exp, 0.4, -0.3);
    const Complex want = meter_char_function(exp.meter_x(), exp.meter_y(), 0.4, -0.3) * std::polar(1.0, 0.4);
    EXPECT_LT(std::abs(z - want), 1e-15);
}

TEST(joint_density, nonnegative_everywhere) {
    Rng rng(4);
    const testkit::MeterKind kinds[] = {testkit::MeterKind::Strong, testkit::MeterKind::WeakCoherent,
                                        testkit::MeterKind::WeakIncoherent, testkit::MeterKind::Moderate};
    for (int k = 0; k < 100; ++k) {
        const GaussianMeter mx = testkit::random_meter(rng, kinds[k % 4]);
        const GaussianMeter my = testkit::random_meter(rng, kinds[(k / 4) % 4]);
        const Experiment exp(testkit::random_density(rng), testkit::random_effect(rng), testkit::random_axis(rng), mx, my);
        const double sx = 3.0 / mx.epsilon(), sy = 3.0 / my.epsilon();
        double lowest = INFINITY;
        for (int i = 0; i < 64; ++i) {
            const double x = -sx + (1.0 + 2 * sx) * i / 63.0;
            for (int j = 0; j < 64; ++j) {
                const double y = -1.0 - sy + (2.0 + 2 * sy) * j / 63.0;
                lowest = std::min(lowest, joint_density(exp, x, y));
            }
        }
        EXPECT_GE(lowest, -1e-10);
    }
}

TEST(char_function, origin_and_symmetry) {
    Rng rng(5);
    for (int k = 0; k < 20; ++k) {
        const Experiment exp = random_experiment(rng, k % 2 == 1);
        const Complex z0 = char_function(exp, 0.0, 0.0);
        EXPECT_EQ(z0.real(), 1.0);
        EXPECT_EQ(z0.imag(), 0.0);
        const double chi = testkit::uniform(rng, -3, 3), eta = testkit::uniform(rng, -3, 3);
        EXPECT_LT(std::abs(char_function(exp, -chi, -eta) - std::conj(char_function(exp, chi, eta))), 1e-12);
    }
}

TEST(char_function, matches_fourier_quadrature) {
    Rng rng(6);
    for (int k = 0; k < 4; ++k) {
        const Experiment exp = random_experiment(rng, k % 2 == 0);
        const Rules r = rules_for(exp);
        for (int a = 0; a < 5; ++a) {
            for (int b = 0; b < 5; ++b) {
                const double chi = -2.0 + a, eta = -2.0 + b;
                const double re = integrate_2d(r, [&](double x, double y) { return std::cos(chi * x + eta * y) * joint_density(exp, x, y); });
                const double im = integrate_2d(r, [&](double x, double y) { return std::sin(chi * x + eta * y) * joint_density(exp, x, y); });
                EXPECT_LT(std::abs(Complex(re, im) - char_function(exp, chi, eta)), 1e-6);
            }
        }
    }
}

TEST(moments, finite_differences_of_char_function) {
    Rng rng(7);
    const double h = 1e-4;
    for (int k = 0; k < 50; ++k) {
        const Experiment exp = random_experiment(rng, k % 2 == 0);
        const MomentReport m = moments(exp);
        auto z = [&](double c, double e) { return char_function(exp, c, e); };
        const double mx = ((z(h, 0) - z(-h, 0)) / (2 * h)).imag();
        const double my = ((z(0, h) - z(0, -h)) / (2 * h)).imag();
        const double mxy = -((z(h, h) - z(h, -h) - z(-h, h) + z(-h, -h)) / (4 * h * h)).real();
        const double scale = std::max({1.0, std::abs(m.mean_x), std::abs(m.mean_y)});
        EXPECT_NEAR(mx, m.mean_x, 1e-6 * scale);
        EXPECT_NEAR(my, m.mean_y, 1e-6 * scale);
        EXPECT_NEAR(mxy, m.cross_xy, 1e-6 * scale);
    }
}

TEST(moments, match_quadrature) {
    Rng rng(8);
    for (int k = 0; k < 10; ++k) {
        const Experiment exp = random_experiment(rng, k % 2 == 0);
        const MomentReport m = moments(exp);
        const Rules r = rules_for(exp);
        auto moment = [&](auto f) { return integrate_2d(r, [&](double x, double y) { return f(x, y) * joint_density(exp, x, y); }); };
        EXPECT_NEAR(moment([](double x, double) { return x; }), m.mean_x, 1e-8);
        EXPECT_NEAR(moment([](double, double y) { return y; }), m.mean_y, 1e-8);
        EXPECT_NEAR(moment([](double x, double y) { return x * y; }), m.cross_xy, 1e-8);
        EXPECT_NEAR(moment([](double x, double y) { return x * y * y; }), m.cross_xy2, 1e-7 * std::max(1.0, std::abs(m.cross_xy2)));
    }
}

TEST(moments, cross_xy2_identity) {
    Rng rng(9);
    for (int k = 0; k < 50; ++k) {
        const Experiment exp = random_experiment(rng, k % 2 == 0);
        const MomentReport m = moments(exp);
        const WeakValueSet w = exp.weak_values();
        const double n = normalization(w, exp.w_x(), exp.w_y());
        const double ey = exp.meter_y().epsilon();
        EXPECT_NEAR(m.cross_xy2 - m.mean_x / (ey * ey), exp.w_x() * exp.w_y() / (4 * n) * w.left_right.real(), 1e-10);
        EXPECT_NEAR(m.norm_N, n, 1e-12 * n);
    }
}

TEST(moments, weak_value_form) {
    // The weak-value expressions, checked against the trace-product engine.
    Rng rng(10);
    for (int k = 0; k < 50; ++k) {
        const Experiment exp = random_experiment(rng, false);
        const MomentReport m = moments(exp);
        const WeakValueSet w = exp.weak_values();
        const double wxy = exp.w_x() * exp.w_y();
        const double n = normalization(w, exp.w_x(), exp.w_y());
        EXPECT_NEAR(m.mean_x, (wxy * w.left.real() + (1 - wxy) * w.left_left) / n, 1e-11);
        EXPECT_NEAR(m.mean_y, (w.sigma.real() - (1 - wxy) * w.sigma_left.real()) / n, 1e-11);
        EXPECT_NEAR(m.cross_xy, 0.5 * wxy * w.sigma_left.real() / n, 1e-11);
    }
}

TEST(moments, anomalous_grin_exact_engine) {
    const Experiment exp = Experiment::pure(kGrinPsi, kGrinPhi, BlochAxis(), GaussianMeter::pure(80), GaussianMeter::pure(1e-9));
    const MomentReport m = moments(exp);
    EXPECT_NEAR(m.mean_x, 16.0 / 17.0, 1e-12);
    EXPECT_NEAR(m.mean_y, 5.0 / 17.0, 1e-12);
    EXPECT_NEAR(m.cross_xy, 0.0, 1e-12);
    EXPECT_NEAR(m.norm_N, 17.0 / 25.0, 1e-12);
}

TEST(moments, strong_meters_factorize) {
    Rng rng(11);
    for (int k = 0; k < 20; ++k) {
        const Experiment exp = random_experiment(rng, k % 2 == 0).with_meters(GaussianMeter::pure(20), GaussianMeter::pure(20));
        EXPECT_LT(std::abs(moments(exp).cross_xy), 1e-12);
    }
}

TEST(moments, no_postselection_means_no_interference) {
    Rng rng(12);
    for (int k = 0; k < 20; ++k) {
        const Experiment exp = random_experiment(rng, false).with_postselection(SystemOperator::identity());
        EXPECT_LT(std::abs(moments(exp).cross_xy), 1e-15);
        const SignedMixture mix = branch_mixture(exp);
        EXPECT_LT(std::abs(mix.components[3].weight + mix.components[4].weight), 1e-15);
        EXPECT_LT(std::abs(mix.components[3].weight - mix.components[4].weight), 1e-15);
    }
}

TEST(limit_moments, closed_form_examples) {
    const WeakValueSet grin = weak_values_pure(kGrinPsi, kGrinPhi, BlochAxis());
    LimitMoments m = limit_moments(LimitRegime::WeakCoherent, grin);
    EXPECT_NEAR(m.mean_x, 0.8, 1e-15);
    EXPECT_NEAR(m.mean_y, 1.0, 1e-15);
    EXPECT_NEAR(m.cross_xy, 0.4, 1e-15);

    m = limit_moments(LimitRegime::StrongCatWeakGrin, grin);
    EXPECT_NEAR(m.mean_x, 16.0 / 17.0, 1e-12);
    EXPECT_NEAR(m.mean_y, 5.0 / 17.0, 1e-12);
    EXPECT_EQ(m.cross_xy, 0.0);
    EXPECT_NEAR(m.norm, 17.0 / 25.0, 1e-12);

    m = limit_moments(LimitRegime::Strong, grin);
    // |L|^2 / (|L|^2 + |R|^2/2 + |S|^2/2) with L = 4/5, R = 1/5, S = 1
    EXPECT_NEAR(m.mean_x, (16.0 / 25) / (16.0 / 25 + 0.5 / 25 + 0.5), 1e-12);
    EXPECT_NEAR(m.norm, 29.0 / 25.0, 1e-12);

    WeakValueSet left;
    left.left = 1.0;
    left.left_left = 1.0;
    left.complete();
    m = limit_moments(LimitRegime::Strong, left);
    EXPECT_NEAR(m.mean_x, 1.0, 1e-15);
    EXPECT_NEAR(m.mean_y, 0.0, 1e-15);

    EXPECT_THROW(limit_moments(LimitRegime::AlmostOrthogonal, grin), InvalidInput);
}

TEST(limit_moments, complex_weak_values) {
    const PureState psi = state(2, Complex(0, 2), Complex(1, -2), -1);
    const WeakValueSet w = weak_values_pure(psi, kGrinPhi, BlochAxis());
    const LimitMoments m = limit_moments(LimitRegime::WeakCoherent, w);
    EXPECT_NEAR(m.mean_x, 1.0, 1e-12);
    EXPECT_NEAR(m.mean_y, 1.0, 1e-12);
    EXPECT_NEAR(m.cross_xy, 0.0, 1e-12);
}

TEST(limit_moments, names_round_trip) {
    for (auto r : {LimitRegime::Strong, LimitRegime::StrongCatWeakGrin, LimitRegime::WeakCoherent, LimitRegime::AlmostOrthogonal}) {
        EXPECT_EQ(parse_limit_regime(to_string(r)), r);
    }
    EXPECT_THROW(parse_limit_regime("medium"), InvalidInput);
}

TEST(limit_moments, orthogonal_divergence_is_labelled) {
    OrthogonalElements e{0.25, 0.25, -0.25};
    try {
        limit_moments(e, 1.0, 1.0);
        FAIL() << "expected DivergentLimit";
    } catch (const DivergentLimit &d) {
        EXPECT_NE(d.scaling().find("1/r^2"), std::string::npos);
    }
    EXPECT_NO_THROW(limit_moments(e, 0.9, 0.9));
}

TEST(limit_consistency, weak_coherent_approach) {
    Rng rng(13);
    for (int k = 0; k < 10; ++k) {
        const Experiment exp = Experiment::pure(testkit::random_pure_state(rng), testkit::random_pure_state(rng),
                                                testkit::random_axis(rng), GaussianMeter::pure(1), GaussianMeter::pure(1));
        const LimitTrace t = limit_consistency(exp, LimitRegime::WeakCoherent);
        EXPECT_TRUE(t.monotone_decreasing);
        EXPECT_LT(t.final_residual(), 1e-2 * std::max(1.0, std::abs(exp.weak_values().sigma) * std::abs(exp.weak_values().left)));
    }
}

TEST(limit_consistency, strong_approach) {
    Rng rng(14);
    for (int k = 0; k < 10; ++k) {
        const Experiment exp = random_experiment(rng, k % 2 == 0);
        const LimitTrace s = limit_consistency(exp, LimitRegime::Strong);
        EXPECT_TRUE(s.monotone_decreasing);
        EXPECT_LT(s.final_residual(), 1e-3);
        const LimitTrace g = limit_consistency(exp, LimitRegime::StrongCatWeakGrin);
        EXPECT_LT(g.final_residual(), g.residuals.front());
    }
}

TEST(orthogonal_pairs, closed_forms_hold_at_any_coherence) {
    Rng rng(15);
    for (int k = 0; k < 30; ++k) {
        const auto [psi, phi] = orthogonal_pair(rng);
        const BlochAxis n = testkit::random_axis(rng);
        const GaussianMeter mx = testkit::random_moderate_meter(rng);
        const GaussianMeter my = testkit::random_moderate_meter(rng);
        const Experiment exp = Experiment::pure(psi, phi, n, mx, my);
        const MatrixElements me = matrix_elements(psi, phi, n);
        const OrthogonalOracle o{me.left, me.sigma, mx.epsilon(), my.epsilon(), exp.w_x(), exp.w_y()};

        const MomentReport m = moments(exp);
        EXPECT_NEAR(m.p_postselect, o.p(), 1e-12);
        EXPECT_NEAR(m.mean_x, o.mean_x(), 1e-10);
        EXPECT_NEAR(m.mean_y, o.mean_y(), 1e-10);
        EXPECT_NEAR(m.cross_xy, o.cross_xy(), 1e-10);
        EXPECT_TRUE(std::isinf(m.norm_N));

        const LimitMoments lim = limit_moments(me, exp.w_x(), exp.w_y());
        EXPECT_NEAR(lim.mean_x, m.mean_x, 1e-10);
        EXPECT_NEAR(lim.mean_y, m.mean_y, 1e-10);
        EXPECT_NEAR(lim.cross_xy, m.cross_xy, 1e-10);

        for (double x : {-0.5, 0.5, 1.0, 1.7}) {
            for (double y : {-1.2, 0.0, 0.5, 1.0}) {
                EXPECT_NEAR(joint_density(exp, x, y), o.density(x, y), 1e-10);
            }
        }
        EXPECT_LT(limit_consistency(exp, LimitRegime::AlmostOrthogonal).final_residual(), 1e-10);
    }
}

TEST(orthogonal_pairs, weak_values_unavailable) {
    Rng rng(16);
    const auto [psi, phi] = orthogonal_pair(rng);
    const Experiment exp = Experiment::pure(psi, phi, BlochAxis(), GaussianMeter::pure(1), GaussianMeter::pure(1));
    EXPECT_THROW(exp.weak_values(), NearOrthogonal);
}
