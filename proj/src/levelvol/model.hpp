#pragma once

#include <cmath>
#include <functional>
#include <vector>

#include "core/errors.hpp"

namespace errcal::lv {

/// Level-dependent volatility surface sigma(t, x) with the two x-partials
/// the error calculus needs.
struct SigmaFn {
  std::function<double(double, double)> value;
  std::function<double(double, double)> dx;
  std::function<double(double, double)> dxx;
};

[[nodiscard]] SigmaFn constant_sigma(double s);

/// CEV-type level dependence sigma(x) = a x^{gamma_exp - 1}.
[[nodiscard]] SigmaFn cev_sigma(double a, double gamma_exp);

/// Rational level dependence sigma(x) = c0 + c1 / (1 + (x / scale)^2).
[[nodiscard]] SigmaFn rational_sigma(double c0, double c1, double scale);

/// One monomial a t^p x^q of a polynomial volatility surface.
struct PolyTerm {
  int p = 0;
  int q = 0;
  double a = 0.0;
};

/// sigma(t, x) = sum a_pq t^p x^q.
[[nodiscard]] SigmaFn poly_sigma(const std::vector<PolyTerm>& terms);

/// Market dX = X sigma(t, X) dB + X r(t) dt on [0, horizon].
struct LocalVolModel {
  double x0 = 100.0;
  double horizon = 1.0;
  std::function<double(double)> rate;  // r(t)
  SigmaFn sigma;

  /// Diffusion-coefficient derivative K = sigma + x sigma_x (the factor in
  /// the first-variation process M).
  [[nodiscard]] double k_factor(double t, double x) const {
    return sigma.value(t, x) + x * sigma.dx(t, x);
  }

  /// Second-derivative factor L = 2 sigma_x + x sigma_xx (drives the
  /// hedge-error Z functional).
  [[nodiscard]] double l_factor(double t, double x) const {
    return 2.0 * sigma.dx(t, x) + x * sigma.dxx(t, x);
  }

  void validate() const;
};

[[nodiscard]] inline std::function<double(double)> constant_rate(double r) {
  if (!std::isfinite(r)) {
    throw ConfigError("rate must be finite");
  }
  return [r](double) { return r; };
}

}  // namespace errcal::lv
