#pragma once

#include "bs/model.hpp"
#include "bs/payoff.hpp"

namespace errcal::bs {

/// Price and its spot/parameter derivatives at a point (t, x) of the
/// pricing surface F(t, x) = e^{-r(T-t)} E[f(S_T) | S_t = x].
struct GreekSet {
  double value = 0.0;
  double delta = 0.0;  // dF/dx
  double gamma = 0.0;  // d2F/dx2
  double speed = 0.0;  // d3F/dx3
  double vega = 0.0;   // dF/dsigma
  double rho = 0.0;    // dF/dr
};

/// True when closed-form price/greeks exist (call, put, forward, constant).
[[nodiscard]] bool has_closed_form(const Payoff& payoff);

/// F(t, x); uses the closed form when available, else Gaussian quadrature.
/// At t == horizon returns f(x). Requires 0 <= t <= horizon and x > 0.
[[nodiscard]] double price(const Model& model, const Payoff& payoff, double t,
                           double x, int nodes = 64);

/// Quadrature route regardless of closed-form availability (cross checks).
[[nodiscard]] double price_quadrature(const Model& model, const Payoff& payoff,
                                      double t, double x, int nodes = 64);

/// All greeks at (t, x); requires t < horizon (the derivatives below the
/// terminal time). Dispatches to closed forms when available.
[[nodiscard]] GreekSet greeks(const Model& model, const Payoff& payoff,
                              double t, double x, int nodes = 64);

/// Quadrature route for greeks: likelihood-ratio weights under the terminal
/// Gaussian, valid for merely Lipschitz payoffs (no payoff derivatives used).
[[nodiscard]] GreekSet greeks_quadrature(const Model& model,
                                         const Payoff& payoff, double t,
                                         double x, int nodes = 64);

}  // namespace errcal::bs
