#include "levelvol/model.hpp"

#include <cmath>
#include <string>

namespace errcal::lv {

SigmaFn constant_sigma(double s) {
  if (!(s > 0.0) || !std::isfinite(s)) {
    throw ConfigError("constant sigma must be positive and finite");
  }
  SigmaFn fn;
  fn.value = [s](double, double) { return s; };
  fn.dx = [](double, double) { return 0.0; };
  fn.dxx = [](double, double) { return 0.0; };
  return fn;
}

SigmaFn cev_sigma(double a, double gamma_exp) {
  if (!(a > 0.0) || !std::isfinite(a) || !std::isfinite(gamma_exp)) {
    throw ConfigError("cev sigma needs a > 0 and finite exponent");
  }
  const double e = gamma_exp - 1.0;
  SigmaFn fn;
  fn.value = [a, e](double, double x) { return a * std::pow(x, e); };
  fn.dx = [a, e](double, double x) { return a * e * std::pow(x, e - 1.0); };
  fn.dxx = [a, e](double, double x) {
    return a * e * (e - 1.0) * std::pow(x, e - 2.0);
  };
  return fn;
}

SigmaFn rational_sigma(double c0, double c1, double scale) {
  if (!(c0 > 0.0) || !std::isfinite(c0) || !std::isfinite(c1) ||
      !(scale > 0.0) || !std::isfinite(scale)) {
    throw ConfigError("rational sigma needs c0 > 0, finite c1, scale > 0");
  }
  if (c0 + std::min(c1, 0.0) <= 0.0) {
    throw ConfigError("rational sigma not positive: c0 + min(c1, 0) <= 0");
  }
  SigmaFn fn;
  fn.value = [c0, c1, scale](double, double x) {
    const double u = x / scale;
    return c0 + c1 / (1.0 + u * u);
  };
  fn.dx = [c1, scale](double, double x) {
    const double u = x / scale;
    const double den = 1.0 + u * u;
    return -2.0 * c1 * u / (scale * den * den);
  };
  fn.dxx = [c1, scale](double, double x) {
    const double u = x / scale;
    const double den = 1.0 + u * u;
    return 2.0 * c1 * (3.0 * u * u - 1.0) / (scale * scale * den * den * den);
  };
  return fn;
}

SigmaFn poly_sigma(const std::vector<PolyTerm>& terms) {
  if (terms.empty()) {
    throw ConfigError("poly sigma needs at least one term");
  }
  for (const auto& t : terms) {
    if (t.p < 0 || t.q < 0 || !std::isfinite(t.a)) {
      throw ConfigError("poly sigma term needs p >= 0, q >= 0, finite a");
    }
  }
  SigmaFn fn;
  fn.value = [terms](double t, double x) {
    double s = 0.0;
    for (const auto& term : terms) {
      s += term.a * std::pow(t, term.p) * std::pow(x, term.q);
    }
    return s;
  };
  fn.dx = [terms](double t, double x) {
    double s = 0.0;
    for (const auto& term : terms) {
      if (term.q >= 1) {
        s += term.a * term.q * std::pow(t, term.p) * std::pow(x, term.q - 1);
      }
    }
    return s;
  };
  fn.dxx = [terms](double t, double x) {
    double s = 0.0;
    for (const auto& term : terms) {
      if (term.q >= 2) {
        s += term.a * term.q * (term.q - 1) * std::pow(t, term.p) *
             std::pow(x, term.q - 2);
      }
    }
    return s;
  };
  return fn;
}

void LocalVolModel::validate() const {
  if (!(x0 > 0.0) || !std::isfinite(x0)) {
    throw ConfigError("x0 must be positive and finite");
  }
  if (!(horizon > 0.0) || !std::isfinite(horizon)) {
    throw ConfigError("horizon must be positive and finite");
  }
  if (!rate) {
    throw ConfigError("rate function not set");
  }
  if (!sigma.value || !sigma.dx || !sigma.dxx) {
    throw ConfigError("sigma surface needs value, dx, and dxx");
  }
  // Sampled boundedness and positivity screen over a wide state box. A
  // surface that fails here would make K, L, or the Euler scheme blow up.
  const int nt = 9;
  const int nx = 17;
  for (int i = 0; i <= nt; ++i) {
    const double t = horizon * static_cast<double>(i) / nt;
    for (int j = 0; j <= nx; ++j) {
      const double x = x0 * std::exp(-3.0 + 6.0 * static_cast<double>(j) / nx);
      const double s = sigma.value(t, x);
      if (!std::isfinite(s) || s <= 0.0 || s > 50.0) {
        throw ConfigError("sigma(t, x) out of (0, 50] at sampled point t=" +
                          std::to_string(t) + " x=" + std::to_string(x));
      }
      const double k = k_factor(t, x);
      const double l = l_factor(t, x);
      if (!std::isfinite(k) || std::abs(k) > 500.0) {
        throw ConfigError("K = sigma + x sigma_x unbounded at sampled point");
      }
      if (!std::isfinite(l) || std::abs(l * x) > 500.0) {
        throw ConfigError("L = 2 sigma_x + x sigma_xx unbounded at sampled point");
      }
      const double r = rate(t);
      if (!std::isfinite(r) || std::abs(r) > 1.0) {
        throw ConfigError("rate(t) must be finite with |r| <= 1");
      }
    }
  }
}

}  // namespace errcal::lv
