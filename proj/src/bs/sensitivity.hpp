#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "bs/model.hpp"
#include "bs/payoff.hpp"
#include "bs/pricer.hpp"

namespace errcal::bs {

/// Error source acting on the pricing functional. Sources are independent;
/// S0, sigma, r carry constant proportional errors (Gamma[p] = p^2).
enum class Source { kB, kS0, kSigma, kR };

/// Evaluation point on one market path.
struct PathState {
  double t = 0.0;  // calendar time in [0, horizon)
  double s = 0.0;  // spot S_t
  double b = 0.0;  // Brownian value B_t (used by the sigma source)
};

/// Gamma of the option value V_t at `state` for one source:
///   B:     delta^2 S^2 sigma^2 kappa(t), kappa from the model kernel
///   S0:    delta^2 S^2              (proportional initial-spot error)
///   sigma: (vega + S(B - sigma t) delta)^2 sigma^2
///   r:     (t S delta + rho)^2 r^2
/// Disabled source -> CapabilityError.
[[nodiscard]] double gamma_value(const Model& model, const Payoff& payoff,
                                 const PathState& state, Source source,
                                 int nodes = 64);

/// Two-time covariance for the B source:
///   delta_s delta_t S_s S_t sigma^2 kappa(s ^ t).
/// Kernel must have a bilinear indicator form (OU or weighted OU).
[[nodiscard]] double gamma_value_cross_b(const Model& model,
                                         const Payoff& payoff,
                                         const PathState& first,
                                         const PathState& second,
                                         int nodes = 64);

/// Gamma of the hedge ratio H_t = delta_t for the B source:
///   gamma_t^2 S^2 sigma^2 kappa(t).
/// Payoff must be C2 (ConfigError otherwise: the terminal limit needs f'').
[[nodiscard]] double gamma_hedge(const Model& model, const Payoff& payoff,
                                 const PathState& state, int nodes = 64);

/// Two-time hedge covariance gamma_s gamma_t S_s S_t sigma^2 kappa(s ^ t).
[[nodiscard]] double gamma_hedge_cross_b(const Model& model,
                                         const Payoff& payoff,
                                         const PathState& first,
                                         const PathState& second,
                                         int nodes = 64);

/// One row of the terminal-limit convergence report at time t:
/// Monte Carlo aggregates of Gamma_B[V_t] against the terminal limit
/// f'(S_T)^2 Gamma_B[S_T] over common antithetic paths.  For the aggregate
/// gaps the limit object is conditionally smoothed, E[f'(S_T)^2 S_T^2|S_t]
/// by quadrature per path: the same expectation (tower property), but the
/// per-path residual is O(tau) instead of O(sqrt(tau)), so small aggregate
/// gaps resolve at 10^3 paths.
///   literal_gap: |mean Gamma_t - mean limit| / mean limit
///   sync_gap:    same with the limit scaled by kappa(t)/kappa(T), which
///                removes the deterministic kappa deficit (the literal gap
///                is bounded below by 1 - kappa(t)/kappa(T) regardless of
///                payoff, so a kernel whose weight is concentrated early is
///                needed for the literal gap to resolve near the horizon)
///   l1_gap:      mean |per-path gap to the sampled terminal value| / mean
///                limit (the pathwise L1 metric; O(sqrt(tau)))
struct LimitRow {
  double t = 0.0;
  double literal_gap = 0.0;
  double sync_gap = 0.0;
  double l1_gap = 0.0;
};

struct LimitReport {
  std::vector<LimitRow> value;
  std::vector<LimitRow> hedge;  // empty unless the payoff is C2
  double mean_limit_value = 0.0;
  double mean_limit_hedge = 0.0;
  std::size_t n_paths = 0;
};

/// Proposition-style limit check along an increasing time sequence.
/// t_sequence must be strictly increasing inside (0, horizon).
[[nodiscard]] LimitReport limit_checks(const Model& model,
                                       const Payoff& payoff,
                                       const std::vector<double>& t_sequence,
                                       std::size_t n_paths, std::uint64_t seed,
                                       int nodes = 64);

/// Weights orthogonal to (vega_0^i) and (rho_0^i) at t = 0, x = s0: the
/// combined claim's Gamma_sigma[V_0] and Gamma_r[V_0] vanish (at t = 0 the
/// sigma-source reduces to vega^2 sigma^2 and the r-source to rho^2 r^2).
struct NeutralPortfolio {
  std::vector<std::vector<double>> basis;  // null-space basis vectors
  int rank = 0;                            // rank of the 2 x n constraint
  std::vector<double> gammas;              // constraint row 1 (vega = c gamma)
  std::vector<double> vegas;
  std::vector<double> rhos;                // constraint row 2
  // Residuals of the first basis vector, with the scales used to normalize.
  double gamma_sigma_residual = 0.0;
  double gamma_r_residual = 0.0;
  double sigma_scale_sq = 0.0;  // (sum |w_i vega_i|)^2 sigma^2
  double r_scale_sq = 0.0;      // (sum |w_i rho_i|)^2 r^2
};

/// Requires >= 3 payoffs per the portfolio contract; throws NumericError
/// with rank diagnostics when the null space is empty.
[[nodiscard]] NeutralPortfolio neutral_portfolio(
    const Model& model, const std::vector<Payoff>& payoffs, int nodes = 64);

/// A[B_t] normalization: the generator convention has A[B_t] = -B_t/2 (the
/// infinitesimal generator of the path perturbation); the table convention
/// doubles the first-order part, A[B_t] = -B_t.
enum class BiasConvention { kGenerator, kTable };

struct BiasRow {
  double gamma = 0.0;       // Gamma_B of the quantity
  double bias = 0.0;        // closed-form A of the quantity
  double chain_bias = 0.0;  // A rebuilt through the second-order chain rule
};

/// Bias table for the B error under the OU structure: rows for B_t, S_t,
/// V_t and (C2 payoffs) H_t. chain_bias must equal bias identically.
struct BiasReport {
  double nu = 1.0;  // normalization factor on A[B_t]
  BiasRow b, spot, value;
  std::optional<BiasRow> hedge;
};

/// `require_hedge` makes a missing hedge row (non-C2 payoff) a ConfigError.
[[nodiscard]] BiasReport bias_table(const Model& model, const Payoff& payoff,
                                    const PathState& state,
                                    BiasConvention convention,
                                    bool require_hedge = false,
                                    int nodes = 64);

}  // namespace errcal::bs
