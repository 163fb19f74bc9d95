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

// Exact readout statistics of the two-meter experiment at arbitrary coupling.
//
// Everything is evaluated from the trace products Tr[E_f A rho_i B] rather
// than from weak values; dividing numerator and denominator by Tr[E_f rho_i]
// gives the usual weak-value form. Working with the products keeps the
// formulas finite for orthogonal preparation/post-selection pairs and for
// the complementary branch 1 - E_f.
//
// The conditional readout law is a signed mixture of six Gaussians with
// common widths (1/eps_x, 1/eps_y), centred at
//   (1, 0)        weight  LL                      path shift
//   (0, +1/-1)    weight  (RR + SS +/- 2 Re SR)/4 polarization shift
//   (1/2, +/-1/2) weight  w_x w_y Re(LR +/- SL)   arm interference
//   (0, 0)        weight  w_y^4 (RR - SS)/2       polarization interference
// where LL = Tr[E Pi_L rho Pi_L], SL = Tr[E sigma_R rho Pi_L], etc.

#ifndef CHESHIRE_STATISTICS_HPP
#define CHESHIRE_STATISTICS_HPP

#include <array>
#include <limits>
#include <string_view>

#include "cheshire/hilbert.hpp"
#include "cheshire/meters.hpp"
#include "cheshire/weak_values.hpp"

namespace cheshire {

/// Below this, a post-selection probability (or normalization) counts as zero.
inline constexpr double kZeroPostselection = 1e-12;

struct MixtureComponent {
    double weight;
    double mean_x;
    double mean_y;
};

/// Unnormalized signed Gaussian mixture of one post-selection branch. The
/// weights sum to the branch probability P{E_f}.
struct SignedMixture {
    std::array<MixtureComponent, 6> components;
    double epsilon_x;
    double epsilon_y;

    double total_weight() const;
    double total_abs_weight() const;
    /// Sum of weight * Gaussian(x, y); integrates to total_weight().
    double evaluate(double x, double y) const;
    /// Same with |weight|.
    double evaluate_envelope(double x, double y) const;
};

/// Preparation, post-selection, polarization axis and the two meters.
/// Immutable; construction validates every part and rejects experiments whose
/// post-selection probability is below kZeroPostselection.
class Experiment {
   public:
    /// Throws InvalidInput for invalid operators, ZeroPostselection if P{E_f} ~ 0.
    Experiment(SystemOperator rho, SystemOperator effect, BlochAxis axis, GaussianMeter meter_x,
               GaussianMeter meter_y);

    static Experiment pure(const PureState &psi, const PureState &phi, const BlochAxis &axis,
                           const GaussianMeter &meter_x, const GaussianMeter &meter_y);

    const SystemOperator &preparation() const {
        return rho_;
    }
    const SystemOperator &postselection() const {
        return effect_;
    }
    const BlochAxis &axis() const {
        return axis_;
    }
    const GaussianMeter &meter_x() const {
        return meter_x_;
    }
    const GaussianMeter &meter_y() const {
        return meter_y_;
    }
    const TraceProducts &traces() const {
        return traces_;
    }
    double w_x() const;
    double w_y() const;
    /// w_x w_y, evaluated in log space.
    double w_xy() const;
    /// w_y^4, evaluated in log space.
    double w_y4() const;

    /// Weak values; throws NearOrthogonal for an orthogonal pair.
    WeakValueSet weak_values() const;

    Experiment with_meters(const GaussianMeter &meter_x, const GaussianMeter &meter_y) const;
    Experiment with_postselection(const SystemOperator &effect) const;

   private:
    SystemOperator rho_;
    SystemOperator effect_;
    BlochAxis axis_;
    GaussianMeter meter_x_;
    GaussianMeter meter_y_;
    TraceProducts traces_;
};

struct MomentReport {
    double mean_x;
    double mean_y;
    double cross_xy;
    double cross_xy2;
    /// P{E_f} / Tr[E_f rho_i]; +infinity for an orthogonal pair.
    double norm_N;
    double p_postselect;
};

/// N = 1 - (1 - w_y^4)(R2w - S2w)/2 - 2 (1 - w_x w_y) Re(Q_w).
/// Throws ZeroPostselection if N <= kZeroPostselection.
double normalization(const WeakValueSet &wv, double w_x, double w_y);

/// P{E_f} = Tr[E_f rho_i] N, evaluated from the trace products.
double postselection_probability(const Experiment &exp);

/// The branch law P{E_f, x, y}, unnormalized.
SignedMixture branch_mixture(const Experiment &exp);

/// Conditional density P{x, y | E_f}.
double joint_density(const Experiment &exp, double x, double y);

/// Fourier transform of the conditional density, E[exp(i(chi x + eta y))].
Complex char_function(const Experiment &exp, double chi, double eta);

/// Initial characteristic function of the meters.
double meter_char_function(const GaussianMeter &meter_x, const GaussianMeter &meter_y, double chi, double eta);

/// Closed-form conditional moments.
MomentReport moments(const Experiment &exp);

enum class LimitRegime { Strong, StrongCatWeakGrin, WeakCoherent, AlmostOrthogonal };

std::string_view to_string(LimitRegime regime);
/// Throws InvalidInput on an unknown name.
LimitRegime parse_limit_regime(std::string_view name);

/// Moments of a limiting regime. `norm` is the limiting N, or P{Phi} for the
/// almost-orthogonal case.
struct LimitMoments {
    double mean_x;
    double mean_y;
    double cross_xy;
    double norm;
};

/// The three bilinears that fix the statistics when <Phi|Psi> = 0:
/// |l_w|^2, |sigma_w|^2 and Re(l_w^* sigma_w).
struct OrthogonalElements {
    double left_sq;
    double sigma_sq;
    double re_left_sigma;

    static OrthogonalElements from(const MatrixElements &me);
    /// Mixed-state analogue: Tr[E Pi_L rho Pi_L], Tr[E sigma rho sigma], Re Tr[E sigma rho Pi_L].
    static OrthogonalElements from(const TraceProducts &t);
};

/// Both meters strong (w -> 0), cat strong with grin weak (w_x -> 0, w_y -> 1),
/// or both weak coherent (w -> 1). Throws InvalidInput for AlmostOrthogonal.
LimitMoments limit_moments(LimitRegime regime, const WeakValueSet &wv);

/// Almost-orthogonal pair at coherence factors (w_x, w_y). Throws
/// DivergentLimit when the post-selection probability vanishes.
LimitMoments limit_moments(const OrthogonalElements &elements, double w_x, double w_y);
LimitMoments limit_moments(const MatrixElements &elements, double w_x, double w_y);

/// Residuals of limit_moments against the exact engine along a sequence of
/// four meter settings approaching `regime`.
struct LimitTrace {
    LimitRegime regime;
    std::array<double, 4> settings;
    std::array<double, 4> residuals;
    bool monotone_decreasing;
    double final_residual() const {
        return residuals.back();
    }
};

/// Sequences: weak-coherent eps = eps~ in {0.4, 0.2, 0.1, 0.05}; strong
/// eps = eps~ in {2, 4, 8, 16}; strong-cat-weak-grin pairs the two;
/// almost-orthogonal uses eps = eps~ in {2, 1, 0.5, 0.25}, where the
/// residual is zero for an exactly orthogonal pair.
LimitTrace limit_consistency(const Experiment &exp, LimitRegime regime);

}  // namespace cheshire

#endif
