#pragma once

#include <cmath>
#include <memory>

#include "core/errors.hpp"
#include "wiener/kernel.hpp"

namespace errcal::bs {

/// Which model inputs carry an infinitesimal error (independent sources;
/// the joint quadratic form is block diagonal across enabled sources).
struct ErrorSwitches {
  bool b = true;      // driving Brownian path
  bool s0 = true;     // initial spot, proportional error structure
  bool sigma = true;  // volatility, proportional error structure
  bool r = true;      // rate, proportional error structure
};

/// Log-normal market dS = S(sigma dB + r dt) on [0, horizon].
/// `kernel` is the error structure on the Brownian source; the variance of
/// B_t under it is kernel->gamma_indicator(t).
struct Model {
  double s0 = 100.0;
  double sigma = 0.2;
  double r = 0.0;
  double horizon = 1.0;
  ErrorSwitches errors;
  std::shared_ptr<wiener::Kernel> kernel = wiener::make_ou_kernel();

  void validate() const {
    if (!(s0 > 0.0) || !std::isfinite(s0)) {
      throw ConfigError("model: s0 must be positive and finite");
    }
    if (!(sigma > 0.0) || !std::isfinite(sigma)) {
      throw ConfigError("model: sigma must be positive and finite");
    }
    if (!std::isfinite(r)) {
      throw ConfigError("model: r must be finite");
    }
    if (!(horizon > 0.0) || !std::isfinite(horizon)) {
      throw ConfigError("model: horizon must be positive and finite");
    }
    if (!kernel) {
      throw ConfigError("model: kernel must be set");
    }
  }

  /// Spot at time t on the path with Brownian value b.
  [[nodiscard]] double spot(double t, double b) const {
    return s0 * std::exp(sigma * b + (r - 0.5 * sigma * sigma) * t);
  }
};

}  // namespace errcal::bs
