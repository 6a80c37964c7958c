#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <vector>

#include "core/grid.hpp"
#include "wiener/kernel.hpp"
#include "wiener/path.hpp"

namespace errcal::wiener {

/// Scalar functional of a Brownian path given by its values at grid nodes.
using BrownianFunctional =
    std::function<double(const std::vector<double>& b, const TimeGrid& grid)>;

/// Pathwise closed form (Gamma or bias) evaluated on the unperturbed path.
using PathClosedForm = BrownianFunctional;

// ============================================================================
// Sharp calculus
// ============================================================================

/// f^# = int sqrt(alpha(s)) h(s) dBhat_s, left-point sum on the grid.
/// Kernel must expose a sharp weight (OU or weighted OU).
[[nodiscard]] double sharp_wiener_integral(
    const std::function<double(double)>& h, const Kernel& kernel,
    const std::vector<double>& db_hat, const TimeGrid& grid);

// ============================================================================
// Resampling perturbation oracle (the ground-truth check for every Gamma
// and bias closed form).  For each path omega, the perturbed value uses
//   dB' = sqrt(e^-theta) dB +/- sqrt(1 - e^-theta) dBhat,
// and with DF± = F(perturbed±) - F(original):
//   * (DF+^2 + DF-^2) / (2 theta)     estimates Gamma[F] given omega,
//   * (DF+ + DF-) / (2 theta)         estimates the conditional mean, i.e.
//                                     the bias A[F], with the O(sqrt(theta))
//                                     martingale part cancelled by the sign
//                                     pairing.
// ============================================================================

struct PerturbGammaResult {
  double empirical = 0.0;      // mean of (DF)^2 / theta over paths
  double empirical_se = 0.0;
  double closed = 0.0;         // mean of the closed form over the same paths
  double closed_se = 0.0;
  double diff = 0.0;           // mean of the paired difference
  double diff_se = 0.0;
  std::size_t n_paths = 0;
};

struct PerturbBiasResult {
  double slope = 0.0;          // through-origin fit of DF/theta on A[F]
  double slope_se = 0.0;
  std::size_t n_paths = 0;
};

struct PerturbCheckResult {
  PerturbGammaResult gamma;
  std::optional<PerturbBiasResult> bias;
};

/// Runs the oracle.  closed_gamma is required; closed_bias is optional and
/// enables the regression check.  Deterministic in (seed, n_paths) for any
/// worker count.
[[nodiscard]] PerturbCheckResult perturb_check(
    const BrownianFunctional& functional, const PathClosedForm& closed_gamma,
    const PathClosedForm* closed_bias, const TimeGrid& grid,
    std::size_t n_paths, double theta, std::uint64_t seed);

// ============================================================================
// Clark formula
// ============================================================================

/// Integrand E[g'(B_T) | F_t_k] for U = g(B_T): Gauss-Hermite smoothing of
/// g' over the remaining N(0, T - t_k) mass, evaluated at every grid node.
[[nodiscard]] std::vector<double> clark_integrand_brownian(
    const std::function<double(double)>& g_prime, const std::vector<double>& b,
    const TimeGrid& grid, int nodes = 64);

/// Integrand for U = f(S_T) under S_t = s0 exp(sigma B_t + (r - sigma^2/2) t):
///   e^{r (T - t_k)} sigma S_{t_k} delta(t_k, S_{t_k}),
/// with delta(t, s) supplied by the pricing layer.
[[nodiscard]] std::vector<double> clark_integrand_lognormal(
    double s0, double sigma, double r,
    const std::function<double(double, double)>& delta,
    const std::vector<double>& b, const TimeGrid& grid);

/// Largest sampled difference quotient |f(x) - f(y)| / |x - y| over n random
/// pairs in [lo, hi]; the screening estimate behind Lipschitz preconditions.
[[nodiscard]] double lipschitz_estimate(const std::function<double(double)>& f,
                                        double lo, double hi, std::size_t n,
                                        std::uint64_t seed);

}  // namespace errcal::wiener
