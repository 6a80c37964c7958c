#include "bs/pricer.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <vector>

#include "core/errors.hpp"
#include "core/normal.hpp"
#include "core/quad.hpp"

namespace errcal::bs {
namespace {

constexpr double kZMax = 12.0;         // +-12 sd covers the Gaussian tail
constexpr double kPanelWidth = 1.0;    // base panel size in sd units
constexpr int kPanelNodes = 32;        // Gauss-Legendre nodes per panel

void check_point(const Model& model, double t, double x) {
  model.validate();
  if (!(x > 0.0) || !std::isfinite(x)) {
    throw ConfigError("pricer: spot x must be positive and finite");
  }
  if (!std::isfinite(t) || t < 0.0) {
    throw ConfigError("pricer: t must be nonnegative and finite");
  }
}

// Raw terminal-law moments E[g(Y) w_k(Y)], Y ~ N(0,1), for the value and the
// likelihood-ratio weights of delta, gamma, speed, vega.
struct Moments {
  double e1 = 0.0;      // E[g]
  double ey = 0.0;      // E[g y]
  double egamma = 0.0;  // E[g (y^2 - 1 - s y)]
  double espeed = 0.0;  // E[g ((y^3 - 3y) - 3 s (y^2 - 1) + 2 s^2 y)]
  double evega = 0.0;   // E[g ((y^2 - 1)/sigma - y sqrt(tau))]
};

// Panel edges over [-kZMax, kZMax]: cut at every split point, keep width
// <= kPanelWidth, and refine geometrically around soft splits whose
// curvature scale (in sd units) is below the panel width.
std::vector<double> build_edges(const std::vector<double>& splits,
                                const std::vector<double>& soft_scales) {
  std::vector<double> edges = {-kZMax, kZMax};
  for (std::size_t i = 0; i < splits.size(); ++i) {
    const double c = splits[i];
    if (c <= -kZMax || c >= kZMax) continue;
    edges.push_back(c);
    const double scale = i < soft_scales.size() ? soft_scales[i] : 0.0;
    if (scale > 0.0 && scale < kPanelWidth) {
      for (double h = std::max(scale, 1e-8); h < kPanelWidth; h *= 2.0) {
        if (c + h < kZMax) edges.push_back(c + h);
        if (c - h > -kZMax) edges.push_back(c - h);
      }
    }
  }
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end(),
                          [](double a, double b) {
                            return std::abs(a - b) < 1e-12;
                          }),
              edges.end());
  // Enforce the base panel width between consecutive edges.
  std::vector<double> out;
  out.push_back(edges.front());
  for (std::size_t i = 1; i < edges.size(); ++i) {
    const double a = edges[i - 1];
    const double b = edges[i];
    const int parts = std::max(1, static_cast<int>(std::ceil(
                                      (b - a) / kPanelWidth - 1e-12)));
    for (int p = 1; p <= parts; ++p) {
      out.push_back(a + (b - a) * p / parts);
    }
  }
  return out;
}

template <typename G>
Moments integrate_moments(const G& g, double s, double sigma, double tau,
                          const std::vector<double>& splits,
                          const std::vector<double>& soft_scales, int nodes) {
  const double sqrt_tau = std::sqrt(tau);
  Moments m;
  auto accumulate = [&](double y, double w) {
    const double gv = g(y);
    const double y2 = y * y;
    m.e1 += w * gv;
    m.ey += w * gv * y;
    m.egamma += w * gv * (y2 - 1.0 - s * y);
    m.espeed +=
        w * gv * ((y2 * y - 3.0 * y) - 3.0 * s * (y2 - 1.0) + 2.0 * s * s * y);
    m.evega += w * gv * ((y2 - 1.0) / sigma - y * sqrt_tau);
  };
  if (splits.empty()) {
    const num::QuadRule& rule = num::gauss_hermite(nodes);
    const double norm = 1.0 / std::sqrt(num::kPi);
    for (std::size_t i = 0; i < rule.x.size(); ++i) {
      accumulate(std::sqrt(2.0) * rule.x[i], norm * rule.w[i]);
    }
    return m;
  }
  const std::vector<double> edges = build_edges(splits, soft_scales);
  const num::QuadRule& rule = num::gauss_legendre(kPanelNodes);
  for (std::size_t p = 0; p + 1 < edges.size(); ++p) {
    const double a = edges[p];
    const double b = edges[p + 1];
    const double half = 0.5 * (b - a);
    const double mid = 0.5 * (a + b);
    for (std::size_t i = 0; i < rule.x.size(); ++i) {
      const double y = mid + half * rule.x[i];
      accumulate(y, half * rule.w[i] * num::normal_pdf(y));
    }
  }
  return m;
}

// Split points of the terminal integrand in the standardized variable
// y = (ln(S_T/x) - m) / s, plus curvature scales for smooth-but-sharp kinds.
void terminal_splits(const Payoff& payoff, double x, double m, double s,
                     std::vector<double>* splits,
                     std::vector<double>* soft_scales) {
  auto push = [&](double level, double price_scale) {
    if (!(level > 0.0)) return;  // S_T > 0 always; kink unreachable
    splits->push_back((std::log(level / x) - m) / s);
    // d y / d ln S = 1/s maps a price-space scale w to w/(level*s) in y.
    soft_scales->push_back(price_scale > 0.0 ? price_scale / (level * s) : 0.0);
  };
  for (double k : payoff.kinks()) {
    push(k, 0.0);
  }
  if (payoff.kind() == Payoff::Kind::kSoftplusCall) {
    // C2, so kinks() is empty, but the sigmoid layer needs resolving.
    const double k = payoff.strike();
    const double width = payoff.d2(k) > 0.0 ? 0.25 / payoff.d2(k) : 0.0;
    push(k, width);
  }
}

GreekSet closed_call_put(const Model& model, const Payoff& payoff, double t,
                         double x, bool is_call) {
  const double tau = model.horizon - t;
  const double k = payoff.strike();
  const double sigma = model.sigma;
  const double s = sigma * std::sqrt(tau);
  const double disc = std::exp(-model.r * tau);
  const double d1 =
      (std::log(x / k) + (model.r + 0.5 * sigma * sigma) * tau) / s;
  const double d2 = d1 - s;
  GreekSet g;
  g.gamma = num::normal_pdf(d1) / (x * s);
  g.vega = x * num::normal_pdf(d1) * std::sqrt(tau);
  g.speed = -g.gamma / x * (d1 / s + 1.0);
  if (is_call) {
    g.value = x * num::normal_cdf(d1) - k * disc * num::normal_cdf(d2);
    g.delta = num::normal_cdf(d1);
    g.rho = k * tau * disc * num::normal_cdf(d2);
  } else {
    g.value = k * disc * num::normal_cdf(-d2) - x * num::normal_cdf(-d1);
    g.delta = -num::normal_cdf(-d1);
    g.rho = -k * tau * disc * num::normal_cdf(-d2);
  }
  return g;
}

GreekSet closed_greeks(const Model& model, const Payoff& payoff, double t,
                       double x) {
  switch (payoff.kind()) {
    case Payoff::Kind::kCall:
      return closed_call_put(model, payoff, t, x, true);
    case Payoff::Kind::kPut:
      return closed_call_put(model, payoff, t, x, false);
    case Payoff::Kind::kForward: {
      GreekSet g;
      g.value = x;
      g.delta = 1.0;
      return g;
    }
    case Payoff::Kind::kConstant: {
      const double tau = model.horizon - t;
      const double disc = std::exp(-model.r * tau);
      const double c = payoff(1.0);
      GreekSet g;
      g.value = c * disc;
      g.rho = -tau * c * disc;
      return g;
    }
    default:
      throw CapabilityError("no closed form for payoff '" + payoff.label() +
                            "'");
  }
}

}  // namespace

bool has_closed_form(const Payoff& payoff) {
  switch (payoff.kind()) {
    case Payoff::Kind::kCall:
    case Payoff::Kind::kPut:
    case Payoff::Kind::kForward:
    case Payoff::Kind::kConstant:
      return true;
    default:
      return false;
  }
}

double price(const Model& model, const Payoff& payoff, double t, double x,
             int nodes) {
  check_point(model, t, x);
  if (t >= model.horizon) {
    return payoff(x);  // at or beyond the horizon the claim is settled
  }
  if (has_closed_form(payoff)) {
    return closed_greeks(model, payoff, t, x).value;
  }
  return price_quadrature(model, payoff, t, x, nodes);
}

double price_quadrature(const Model& model, const Payoff& payoff, double t,
                        double x, int nodes) {
  check_point(model, t, x);
  if (t >= model.horizon) {
    return payoff(x);
  }
  const double tau = model.horizon - t;
  const double sigma = model.sigma;
  const double m = (model.r - 0.5 * sigma * sigma) * tau;
  const double s = sigma * std::sqrt(tau);
  std::vector<double> splits;
  std::vector<double> scales;
  terminal_splits(payoff, x, m, s, &splits, &scales);
  auto g = [&](double y) { return payoff(x * std::exp(m + s * y)); };
  const Moments mom = integrate_moments(g, s, sigma, tau, splits, scales,
                                        nodes);
  return std::exp(-model.r * tau) * mom.e1;
}

GreekSet greeks(const Model& model, const Payoff& payoff, double t, double x,
                int nodes) {
  check_point(model, t, x);
  if (t >= model.horizon) {
    throw ConfigError("greeks: t must be strictly below the horizon");
  }
  if (has_closed_form(payoff)) {
    return closed_greeks(model, payoff, t, x);
  }
  return greeks_quadrature(model, payoff, t, x, nodes);
}

GreekSet greeks_quadrature(const Model& model, const Payoff& payoff, double t,
                           double x, int nodes) {
  check_point(model, t, x);
  if (t >= model.horizon) {
    throw ConfigError("greeks: t must be strictly below the horizon");
  }
  const double tau = model.horizon - t;
  const double sigma = model.sigma;
  const double m = (model.r - 0.5 * sigma * sigma) * tau;
  const double s = sigma * std::sqrt(tau);
  std::vector<double> splits;
  std::vector<double> scales;
  terminal_splits(payoff, x, m, s, &splits, &scales);
  auto g = [&](double y) { return payoff(x * std::exp(m + s * y)); };
  const Moments mom = integrate_moments(g, s, sigma, tau, splits, scales,
                                        nodes);
  const double disc = std::exp(-model.r * tau);
  GreekSet out;
  out.value = disc * mom.e1;
  out.delta = disc / (x * s) * mom.ey;
  out.gamma = disc / (x * x * s * s) * mom.egamma;
  out.speed = disc / (x * x * x * s * s * s) * mom.espeed;
  out.vega = disc * mom.evega;
  out.rho = tau * (x * out.delta - out.value);
  return out;
}

}  // namespace errcal::bs
