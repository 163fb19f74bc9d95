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

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <string>

#include "cheshire/errors.hpp"

namespace cheshire {

namespace {

// N times Tr[E rho], in homogeneous form: `unit` is Tr[E rho] for trace
// products and 1 for weak values.
double weighted_normalization(double unit, const WeakValueSet &v, double w_xy, double w_y4) {
    return unit - 0.5 * (1.0 - w_y4) * (v.right_right - v.sigma_sigma) - 2.0 * (1.0 - w_xy) * v.left_right.real();
}

double gaussian_2d(double epsilon_x, double epsilon_y, double dx, double dy) {
    return epsilon_x * epsilon_y / (2.0 * std::numbers::pi) *
           std::exp(-0.5 * (epsilon_x * epsilon_x * dx * dx + epsilon_y * epsilon_y * dy * dy));
}

[[noreturn]] void throw_zero_postselection(double value, const char *what) {
    std::ostringstream msg;
    msg << "post-selection never succeeds: " << what << " = " << value;
    throw ZeroPostselection(msg.str());
}

double max_abs_diff(const MomentReport &exact, const LimitMoments &limit) {
    return std::max({std::abs(exact.mean_x - limit.mean_x), std::abs(exact.mean_y - limit.mean_y),
                     std::abs(exact.cross_xy - limit.cross_xy)});
}

}  // namespace

double SignedMixture::total_weight() const {
    double s = 0.0;
    for (const auto &c : components) {
        s += c.weight;
    }
    return s;
}

double SignedMixture::total_abs_weight() const {
    double s = 0.0;
    for (const auto &c : components) {
        s += std::abs(c.weight);
    }
    return s;
}

double SignedMixture::evaluate(double x, double y) const {
    double s = 0.0;
    for (const auto &c : components) {
        if (c.weight != 0.0) {
            s += c.weight * gaussian_2d(epsilon_x, epsilon_y, x - c.mean_x, y - c.mean_y);
        }
    }
    return s;
}

double SignedMixture::evaluate_envelope(double x, double y) const {
    double s = 0.0;
    for (const auto &c : components) {
        if (c.weight != 0.0) {
            s += std::abs(c.weight) * gaussian_2d(epsilon_x, epsilon_y, x - c.mean_x, y - c.mean_y);
        }
    }
    return s;
}

Experiment::Experiment(SystemOperator rho, SystemOperator effect, BlochAxis axis, GaussianMeter meter_x,
                       GaussianMeter meter_y)
    : rho_(std::move(rho)),
      effect_(std::move(effect)),
      axis_(axis),
      meter_x_(meter_x),
      meter_y_(meter_y) {
    require_valid(rho_, OperatorRole::Density, "preparation");
    require_valid(effect_, OperatorRole::Povm, "post-selection");
    traces_ = trace_products(rho_, effect_, axis_);
    const double p = postselection_probability(*this);
    if (!(p > kZeroPostselection)) {
        throw_zero_postselection(p, "P{E_f}");
    }
}

Experiment Experiment::pure(const PureState &psi, const PureState &phi, const BlochAxis &axis,
                            const GaussianMeter &meter_x, const GaussianMeter &meter_y) {
    return Experiment(SystemOperator::projector(psi), SystemOperator::projector(phi), axis, meter_x, meter_y);
}

double Experiment::w_x() const {
    return w_factor(meter_x_);
}

double Experiment::w_y() const {
    return w_factor(meter_y_);
}

double Experiment::w_xy() const {
    return std::exp(log_w_factor(meter_x_.epsilon_tilde()) + log_w_factor(meter_y_.epsilon_tilde()));
}

double Experiment::w_y4() const {
    return std::exp(4.0 * log_w_factor(meter_y_.epsilon_tilde()));
}

WeakValueSet Experiment::weak_values() const {
    return weak_values_general(rho_, effect_, axis_);
}

Experiment Experiment::with_meters(const GaussianMeter &meter_x, const GaussianMeter &meter_y) const {
    return Experiment(rho_, effect_, axis_, meter_x, meter_y);
}

Experiment Experiment::with_postselection(const SystemOperator &effect) const {
    return Experiment(rho_, effect, axis_, meter_x_, meter_y_);
}

double normalization(const WeakValueSet &wv, double w_x, double w_y) {
    if (!(w_x > 0.0 && w_x <= 1.0 && w_y > 0.0 && w_y <= 1.0)) {
        throw InvalidInput("coherence factors must lie in (0, 1]");
    }
    const double n = weighted_normalization(1.0, wv, w_x * w_y, std::pow(w_y, 4));
    if (!(n > kZeroPostselection)) {
        throw_zero_postselection(n, "N");
    }
    return n;
}

double postselection_probability(const Experiment &exp) {
    const TraceProducts &t = exp.traces();
    return weighted_normalization(t.trace, t.products, exp.w_xy(), exp.w_y4());
}

SignedMixture branch_mixture(const Experiment &exp) {
    const WeakValueSet &v = exp.traces().products;
    const double w_xy = exp.w_xy();
    const double w_y4 = exp.w_y4();
    const double shift = v.right_right + v.sigma_sigma;
    const double sigma_right = v.sigma_right.real();

    SignedMixture m;
    m.epsilon_x = exp.meter_x().epsilon();
    m.epsilon_y = exp.meter_y().epsilon();
    m.components = {{
        {v.left_left, 1.0, 0.0},
        {0.25 * (shift + 2.0 * sigma_right), 0.0, 1.0},
        {0.25 * (shift - 2.0 * sigma_right), 0.0, -1.0},
        {w_xy * (v.left_right + v.sigma_left).real(), 0.5, 0.5},
        {w_xy * (v.left_right - v.sigma_left).real(), 0.5, -0.5},
        {0.5 * w_y4 * (v.right_right - v.sigma_sigma), 0.0, 0.0},
    }};
    return m;
}

double joint_density(const Experiment &exp, double x, double y) {
    return branch_mixture(exp).evaluate(x, y) / postselection_probability(exp);
}

double meter_char_function(const GaussianMeter &meter_x, const GaussianMeter &meter_y, double chi, double eta) {
    const double sx = chi / meter_x.epsilon();
    const double sy = eta / meter_y.epsilon();
    return std::exp(-0.5 * (sx * sx + sy * sy));
}

Complex char_function(const Experiment &exp, double chi, double eta) {
    const SignedMixture m = branch_mixture(exp);
    Complex sum = 0.0;
    for (const auto &c : m.components) {
        sum += c.weight * std::polar(1.0, chi * c.mean_x + eta * c.mean_y);
    }
    // Same summation order as total_weight(), so Z(0, 0) is exactly 1.
    return meter_char_function(exp.meter_x(), exp.meter_y(), chi, eta) * sum / m.total_weight();
}

MomentReport moments(const Experiment &exp) {
    const TraceProducts &t = exp.traces();
    const WeakValueSet &v = t.products;
    const double w_xy = exp.w_xy();
    const double p = postselection_probability(exp);
    if (!(p > kZeroPostselection)) {
        throw_zero_postselection(p, "P{E_f}");
    }
    const double spread_y = 1.0 / exp.meter_y().epsilon();

    MomentReport r;
    r.mean_x = (w_xy * v.left.real() + (1.0 - w_xy) * v.left_left) / p;
    r.mean_y = (v.sigma.real() - (1.0 - w_xy) * v.sigma_left.real()) / p;
    r.cross_xy = 0.5 * w_xy * v.sigma_left.real() / p;
    r.cross_xy2 = r.mean_x * spread_y * spread_y + 0.25 * w_xy * v.left_right.real() / p;
    r.p_postselect = p;
    const double scale = exp.preparation().max_abs_entry() * exp.postselection().max_abs_entry();
    r.norm_N = std::abs(t.trace) >= kOrthogonalityThreshold * scale ? p / t.trace
                                                                       : std::numeric_limits<double>::infinity();
    return r;
}

std::string_view to_string(LimitRegime regime) {
    switch (regime) {
        case LimitRegime::Strong:
            return "strong";
        case LimitRegime::StrongCatWeakGrin:
            return "strong-cat-weak-grin";
        case LimitRegime::WeakCoherent:
            return "weak-coherent";
        case LimitRegime::AlmostOrthogonal:
            return "almost-orthogonal";
    }
    return "unknown";
}

LimitRegime parse_limit_regime(std::string_view name) {
    for (auto r : {LimitRegime::Strong, LimitRegime::StrongCatWeakGrin, LimitRegime::WeakCoherent,
                   LimitRegime::AlmostOrthogonal}) {
        if (name == to_string(r)) {
            return r;
        }
    }
    throw InvalidInput("unknown limit regime '" + std::string(name) + "'");
}

OrthogonalElements OrthogonalElements::from(const MatrixElements &me) {
    return {std::norm(me.left), std::norm(me.sigma), (std::conj(me.left) * me.sigma).real()};
}

OrthogonalElements OrthogonalElements::from(const TraceProducts &t) {
    return {t.products.left_left, t.products.sigma_sigma, t.products.sigma_left.real()};
}

LimitMoments limit_moments(LimitRegime regime, const WeakValueSet &wv) {
    switch (regime) {
        case LimitRegime::Strong: {
            const double d = wv.left_left + 0.5 * wv.right_right + 0.5 * wv.sigma_sigma;
            if (!(d > kZeroPostselection)) {
                throw_zero_postselection(d, "N");
            }
            return {wv.left_left / d, wv.sigma_right.real() / d, 0.0, d};
        }
        case LimitRegime::StrongCatWeakGrin: {
            const double n = 1.0 - 2.0 * wv.left_right.real();
            if (!(n > kZeroPostselection)) {
                throw_zero_postselection(n, "N");
            }
            return {wv.left_left / n, wv.sigma_right.real() / n, 0.0, n};
        }
        case LimitRegime::WeakCoherent:
            return {wv.left.real(), wv.sigma.real(), 0.5 * wv.sigma_left.real(), 1.0};
        case LimitRegime::AlmostOrthogonal:
            break;
    }
    throw InvalidInput("the almost-orthogonal limit takes matrix elements and coherence factors");
}

LimitMoments limit_moments(const OrthogonalElements &e, double w_x, double w_y) {
    if (!(w_x >= 0.0 && w_x <= 1.0 && w_y >= 0.0 && w_y <= 1.0)) {
        throw InvalidInput("coherence factors must lie in [0, 1]");
    }
    const double w_xy = w_x * w_y;
    const double w_y4 = std::pow(w_y, 4);
    const double p = 2.0 * (1.0 - w_xy) * e.left_sq - 0.5 * (1.0 - w_y4) * (e.left_sq - e.sigma_sq);
    if (!(p > kZeroPostselection)) {
        if (e.re_left_sigma != 0.0) {
            throw DivergentLimit("almost-orthogonal limit: P{Phi} -> 0 while Re(l_w* sigma_w) != 0, <xy> diverges",
                                 "<xy> ~ 1/r^2 for overlap r = |<Phi|Psi>|");
        }
        throw DivergentLimit("almost-orthogonal limit: P{Phi} -> 0, moments undefined",
                             "P{Phi} ~ r^2 for overlap r = |<Phi|Psi>|");
    }
    return {(1.0 - w_xy) * e.left_sq / p, -(1.0 - w_xy) * e.re_left_sigma / p, 0.5 * w_xy * e.re_left_sigma / p, p};
}

LimitMoments limit_moments(const MatrixElements &elements, double w_x, double w_y) {
    return limit_moments(OrthogonalElements::from(elements), w_x, w_y);
}

LimitTrace limit_consistency(const Experiment &exp, LimitRegime regime) {
    LimitTrace trace{regime, {}, {}, true};
    switch (regime) {
        case LimitRegime::WeakCoherent:
            trace.settings = {0.4, 0.2, 0.1, 0.05};
            break;
        case LimitRegime::Strong:
        case LimitRegime::StrongCatWeakGrin:
            trace.settings = {2.0, 4.0, 8.0, 16.0};
            break;
        case LimitRegime::AlmostOrthogonal:
            trace.settings = {2.0, 1.0, 0.5, 0.25};
            break;
    }
    const std::array<double, 4> grin_weak{0.4, 0.2, 0.1, 0.05};

    for (std::size_t k = 0; k < trace.settings.size(); ++k) {
        const double s = trace.settings[k];
        const GaussianMeter mx = GaussianMeter::pure(s);
        const GaussianMeter my = GaussianMeter::pure(regime == LimitRegime::StrongCatWeakGrin ? grin_weak[k] : s);
        const Experiment step = exp.with_meters(mx, my);
        const MomentReport exact = moments(step);
        LimitMoments limit{};
        if (regime == LimitRegime::AlmostOrthogonal) {
            limit = limit_moments(OrthogonalElements::from(step.traces()), step.w_x(), step.w_y());
        } else {
            limit = limit_moments(regime, step.weak_values());
        }
        trace.residuals[k] = max_abs_diff(exact, limit);
        if (k > 0 && trace.residuals[k] > trace.residuals[k - 1]) {
            trace.monotone_decreasing = false;
        }
    }
    return trace;
}

}  // namespace cheshire
