#pragma once

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "core/grid.hpp"

namespace errcal::wiener {

// ============================================================================
// Error kernels on Wiener space: the quadratic form
//   Gamma[ int h dB ] = epsilon[h]
// for the admissible h.  Every kernel evaluates epsilon on indicators
// h = 1_[0,t] (the Brownian-motion case, gamma_indicator); the
// Ornstein-Uhlenbeck and weighted kernels also evaluate generic h in L^2
// (gamma_l2).  Time integrals use the trapezoid rule.
// ============================================================================

class Kernel {
 public:
  virtual ~Kernel() = default;

  [[nodiscard]] virtual std::string name() const = 0;

  /// epsilon[1_[0,t]] = Gamma[B_t].
  [[nodiscard]] virtual double gamma_indicator(double t) const = 0;

  /// Bilinear form epsilon[1_[0,s], 1_[0,t]]; defined for the kernels whose
  /// epsilon is an integral against h (OU, weighted OU), where it equals
  /// gamma_indicator(min(s, t)). CapabilityError otherwise.
  [[nodiscard]] virtual double gamma_indicator_cross(double s, double t) const;

  /// epsilon[h] for generic h sampled on the grid nodes; CapabilityError for
  /// kernels defined only on indicators (beta, fractional).
  [[nodiscard]] virtual double gamma_l2(
      const std::function<double(double)>& h, const TimeGrid& grid) const;

  /// Weight alpha(t) of the sharp integral  f^# = int sqrt(alpha) h dBhat;
  /// CapabilityError when the kernel has no such representation.
  [[nodiscard]] virtual double sharp_weight(double t) const;

  /// Absolute error estimate attached to gamma_indicator (0 when exact).
  [[nodiscard]] virtual double truncation_error(double t) const;
};

/// Gamma[B_t] = t; epsilon[h] = int h^2.
[[nodiscard]] std::shared_ptr<Kernel> make_ou_kernel();

/// Gamma[B_t] = int_0^t alpha; epsilon[h] = int alpha h^2; alpha >= 0.
/// Time integrals by trapezoid with quad_steps panels.
[[nodiscard]] std::shared_ptr<Kernel> make_weighted_ou_kernel(
    std::function<double(double)> alpha, int quad_steps = 4000);

/// Gamma[B_t] = 2 (int_0^t beta)(int_t^upper beta); beta >= 0 integrable on
/// [0, upper], the mass beyond upper asserted negligible by the caller.
[[nodiscard]] std::shared_ptr<Kernel> make_beta_kernel(
    std::function<double(double)> beta, double upper, int quad_steps = 4000);

/// Fractional structure on [0,1], exponent q in (0, 1/2):
///   Gamma[B_t] = sum_{n>=1} 4 (1 - cos(2 pi n t)) / (2 pi n)^{2(1-q)},
/// summed to `truncation` with the monotone tail added analytically
/// (integral plus Euler-Maclaurin half-term); the oscillatory remainder is
/// reported by truncation_error.
[[nodiscard]] std::shared_ptr<Kernel> make_fractional_kernel(
    double q, long truncation = 100000);

}  // namespace errcal::wiener
