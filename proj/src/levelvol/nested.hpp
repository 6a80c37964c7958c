#pragma once

#include <cstdint>
#include <vector>

#include "bs/payoff.hpp"
#include "core/stats.hpp"
#include "levelvol/model.hpp"

namespace errcal::lv {

// ============================================================================
// Nested Monte Carlo for the conditional-expectation error formulas under
// level-dependent volatility.  With M the first variation, I_t the variance
// integral, and tau = [t, T]:
//   V_t        = e^{-int_t^T r} E[ f(X_T) | F_t ]
//   Gamma[V_t] = e^{-2 int_t^T r} ( E[ f'(X_T) M_T | F_t ] )^2 I_t
//   H_t        = e^{-int_t^T r} E[ f'(X_T) M_T | F_t ] / M_t
// Each outer path carries (X_t, M_t, I_t); the conditional expectation is an
// inner ensemble restarted at (t, X_t) with its own relative first variation
// M_{t,.} (M_s = M_t M_{t,s}).  The squared conditional expectation is
// de-biased by the half-ensemble product mean_a * mean_b, whose expectation
// is exactly CE^2, so per-path Gamma draws may go negative while their mean
// is unbiased.
// ============================================================================

/// Sampling sizes plus a hard cost ceiling.  cost() counts scheme steps
/// (outer paths each run n_ensembles inner ensembles over the full grid);
/// check() refuses over-budget runs up front with the estimate, instead of
/// starting a job that cannot finish.
struct NestedBudget {
  std::size_t n_outer = 200;
  std::size_t n_inner = 200;
  std::size_t n_steps = 100;
  double max_cost = 5e9;

  [[nodiscard]] double cost(std::size_t n_ensembles = 1) const;
  void check(std::size_t n_ensembles = 1) const;
};

/// Two candidate forms of the hedge-error functional Z in Gamma[H_t].
enum class ZVariant {
  /// Z_t^T = int_t^T L_s dB_s - int_t^T K_s L_s M_s ds, paired with
  /// Gamma[H_t] = e^{-2 int r} ( E[(M_T/M_t)(f''(X_T) M_T + f'(X_T) Z_t^T)] )^2 I_t.
  kVerbatim,
  /// First-variation weight applied to the dB integrand as well:
  /// Zt = int_t^T L_s M_{t,s} (dB_s - K_s ds), paired with
  /// Gamma[H_t] = e^{-2 int r} ( E[f''(X_T) M_{t,T}^2 + f'(X_T) M_{t,T} Zt] )^2 M_t^2 I_t.
  /// Coincides with kVerbatim when sigma is level-independent (L = 0); the
  /// finite-difference arbitration test probes which one differentiates the
  /// hedge ratio when they differ.
  kCorrected,
};

/// Per-outer-path draws (surviving paths only) plus their aggregates.
struct NestedResult {
  std::vector<double> value;  // V_t (or H_t) on each surviving outer path
  std::vector<double> gamma;  // Gamma[V_t] (or Gamma[H_t]) on the same paths
  num::MeanSE value_mean;
  num::MeanSE gamma_mean;
  std::size_t n_dropped = 0;         // outer paths discarded at the excursion cap
  std::size_t n_inner_exploded = 0;  // inner paths frozen at the excursion cap
};

/// Price V_t and variance Gamma[V_t]; t must be a node of the n_steps grid.
[[nodiscard]] NestedResult value_and_gamma_v(const LocalVolModel& model,
                                             const bs::Payoff& payoff, double t,
                                             const NestedBudget& budget,
                                             std::uint64_t seed);

/// Hedge ratio H_t and variance Gamma[H_t].  Needs a twice-differentiable
/// payoff; anything rougher is an input error.
[[nodiscard]] NestedResult hedge_and_gamma_h(
    const LocalVolModel& model, const bs::Payoff& payoff, double t,
    const NestedBudget& budget, std::uint64_t seed,
    ZVariant variant = ZVariant::kVerbatim);

/// Cross-covariance Gamma[V_s, V_t] = e^{-int_s^T r} e^{-int_t^T r}
/// E[f'(X_T) M_T | F_s] E[f'(X_T) M_T | F_t] I_{s ^ t} for grid nodes
/// s <= t, with the two conditional expectations estimated on separate inner
/// ensembles of the same outer path.  The per-path factors are exposed so the
/// exact estimator identity cross^2 = gamma_s gamma_t I_s / I_t (plain,
/// un-debiased gammas) can be checked term by term.
struct CrossResult {
  std::vector<double> ce_s;  // E[f'(X_T) M_T | F_s] estimate per path
  std::vector<double> ce_t;
  std::vector<double> i_s;
  std::vector<double> i_t;
  std::vector<double> gamma_s;  // de-biased Gamma[V_s] per path
  std::vector<double> gamma_t;
  std::vector<double> cross;  // Gamma[V_s, V_t] per path (plain CE product)
  double disc_s = 1.0;
  double disc_t = 1.0;
  num::MeanSE gamma_s_mean;
  num::MeanSE gamma_t_mean;
  num::MeanSE cross_mean;
  std::size_t n_dropped = 0;
  std::size_t n_inner_exploded = 0;
};

[[nodiscard]] CrossResult gamma_v_cross(const LocalVolModel& model,
                                        const bs::Payoff& payoff, double s,
                                        double t, const NestedBudget& budget,
                                        std::uint64_t seed);

/// Raw inner-ensemble means restarted at (t, x), for common-random-number
/// probes: the draws depend only on (seed, outer_index, inner index, step),
/// never on x, so bumping x keeps every increment fixed.  The bracket fields
/// are the two Gamma[H] conditional expectations and are NaN unless the
/// payoff is twice differentiable.
struct InnerProbe {
  double ce_value = 0.0;              // mean f(X_T)
  double ce_delta = 0.0;              // mean f'(X_T) M_{t,T}
  double ce_bracket_verbatim = 0.0;   // mean M_{t,T}(f'' M_t M_{t,T} + f' Z)
  double ce_bracket_corrected = 0.0;  // mean f'' M_{t,T}^2 + f' M_{t,T} Zt
};

[[nodiscard]] InnerProbe inner_probe(const LocalVolModel& model,
                                     const bs::Payoff& payoff, double t,
                                     double x, double m_t, std::size_t n_inner,
                                     std::size_t n_steps, std::uint64_t seed,
                                     std::uint64_t outer_index);

}  // namespace errcal::lv
