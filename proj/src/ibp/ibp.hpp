#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "core/stats.hpp"

namespace errcal::ibp {

// ============================================================================
// Integration by parts on the uniform hypercube (0,1)^N carrying the error
// structure whose coordinate operator is gamma[u](x) = x^2 (1-x)^2 u'(x)^2.
// The weighted gradient D_n F = (d_n F) U_n (1 - U_n) satisfies
//   E[ sum_n a_n D_n F ] = - E[ F sum_n a_n (1 - 2 U_n) ]
// for constant directions a, because x(1-x) vanishes at both endpoints.
// Applied to the one-increment-per-step scheme below, the same device turns
// derivatives of E[Psi(S_N)] in the starting point x or the step scale
// lambda into expectations of Psi(S_N) times an explicit weight, so no
// derivative of Psi is ever sampled.
// ============================================================================

/// Innovation family xi(n, u) for steps n = 1..N with its u-derivatives.
/// Invariant: xi_u(n, u) != 0 on (0,1).
struct Innovations {
  std::function<double(int, double)> xi;
  std::function<double(int, double)> xi_u;
  std::function<double(int, double)> xi_uu;
};

/// Gaussian innovations xi(n, u) = Phi^{-1}(u), the same for every step.
[[nodiscard]] Innovations gaussian_innovations();

/// Scheme S_n = S_{n-1} + lambda sigma(S_{n-1}) xi(n, U_n), S_0 = x, with
/// independent uniforms U_1..U_N.
struct DiscreteScheme {
  std::size_t n_steps = 1;
  double x = 1.0;
  double lambda = 0.1;
  std::function<double(double)> sigma;
  std::function<double(double)> sigma_dx;
  Innovations innov;

  void validate() const;
};

/// Uniform row for one sample, every entry strictly inside (0,1): draws in
/// the guard band [0, 1e-12] or [1 - 1e-12, 1] are resampled
/// deterministically (attempt counter in the step word's high bits).
[[nodiscard]] std::vector<double> draw_uniform_row(std::size_t n_steps,
                                                   std::uint64_t seed,
                                                   std::uint64_t sample);

/// S_0..S_N for one row of uniforms.
[[nodiscard]] std::vector<double> scheme_path(const DiscreteScheme& scheme,
                                              const std::vector<double>& u);

/// Weighted gradient of F = psi(S_N) as a function on the hypercube:
/// D_n F = psi'(S_N) (dS_N / dU_n) U_n (1 - U_n), n = 1..N.
[[nodiscard]] std::vector<double> discrete_gradient(
    const DiscreteScheme& scheme, const std::vector<double>& u,
    const std::function<double(double)>& psi_d1);

/// Both sides of the integration-by-parts identity for F = psi(S_N) in the
/// direction a, estimated on shared samples so diff carries the paired
/// standard error.
struct IbpCheck {
  num::MeanSE lhs;   // E[ sum_n a_n D_n F ]
  num::MeanSE rhs;   // -E[ F sum_n a_n (1 - 2 U_n) ]
  num::MeanSE diff;  // per-sample lhs - rhs
};

[[nodiscard]] IbpCheck ibp_check(const DiscreteScheme& scheme,
                                 const std::function<double(double)>& psi,
                                 const std::function<double(double)>& psi_d1,
                                 const std::vector<double>& direction,
                                 std::size_t n_samples, std::uint64_t seed);

/// A weighted-expectation derivative estimate.  Samples where some needed
/// xi_u falls below the magnitude floor are rejected from both means; more
/// than 0.1% of them aborts the run, because that signals the xi_u != 0
/// invariant is broken rather than grazed.
struct WeightEstimate {
  num::MeanSE value;       // E[psi(S_N)]
  num::MeanSE derivative;  // E[psi(S_N) W]
  std::size_t n_rejected = 0;
};

/// d/dx E[psi(S_N)] = E[psi(S_N) W_x] with the one-coordinate weight
///   W_x = xi_uu(1,U_1) (1 + sigma'(x) lambda xi(1,U_1))
///         / (lambda sigma(x) xi_u(1,U_1)^2) - sigma'(x) / sigma(x),
/// valid when xi(1,.) / xi_u(1,.) and 1 / xi_u(1,.) vanish at both ends of
/// (0,1) (Gaussian innovations do) or when psi(S_N) itself kills the
/// boundary terms.
[[nodiscard]] WeightEstimate delta_weight_estimate(
    const DiscreteScheme& scheme, const std::function<double(double)>& psi,
    std::size_t n_samples, std::uint64_t seed);

/// d/dlambda E[psi(S_N)] = E[psi(S_N) W_lambda] with the all-coordinates
/// weight
///   W_lambda = -(1/lambda) sum_n [ (xi_u^2 - xi xi_uu) / xi_u^2 ](n, U_n),
/// under the same boundary-vanishing proviso, coordinate by coordinate.
[[nodiscard]] WeightEstimate lambda_weight_estimate(
    const DiscreteScheme& scheme, const std::function<double(double)>& psi,
    std::size_t n_samples, std::uint64_t seed);

}  // namespace errcal::ibp
