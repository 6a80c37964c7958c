#include "bs/payoff.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

#include "core/errors.hpp"

namespace errcal::bs {
namespace {

// Overflow-safe softplus and logistic pieces in the scaled variable z.
double softplus(double z) {
  return std::max(z, 0.0) + std::log1p(std::exp(-std::abs(z)));
}

double sigmoid(double z) {
  if (z >= 0.0) {
    return 1.0 / (1.0 + std::exp(-z));
  }
  const double e = std::exp(z);
  return e / (1.0 + e);
}

}  // namespace

Payoff Payoff::call(double strike) {
  if (!(strike > 0.0) || !std::isfinite(strike)) {
    throw ConfigError("call strike must be positive and finite");
  }
  Payoff p;
  p.kind_ = Kind::kCall;
  p.smoothness_ = Smoothness::kLipschitz;
  p.f_ = [strike](double x) { return std::max(x - strike, 0.0); };
  p.d1_ = [strike](double x) { return x > strike ? 1.0 : 0.0; };
  p.kinks_ = {strike};
  p.lipschitz_bound_ = 1.0;
  p.strike_ = strike;
  p.has_strike_ = true;
  p.label_ = "call";
  return p;
}

Payoff Payoff::put(double strike) {
  if (!(strike > 0.0) || !std::isfinite(strike)) {
    throw ConfigError("put strike must be positive and finite");
  }
  Payoff p;
  p.kind_ = Kind::kPut;
  p.smoothness_ = Smoothness::kLipschitz;
  p.f_ = [strike](double x) { return std::max(strike - x, 0.0); };
  p.d1_ = [strike](double x) { return x < strike ? -1.0 : 0.0; };
  p.kinks_ = {strike};
  p.lipschitz_bound_ = 1.0;
  p.strike_ = strike;
  p.has_strike_ = true;
  p.label_ = "put";
  return p;
}

Payoff Payoff::forward() {
  Payoff p;
  p.kind_ = Kind::kForward;
  p.smoothness_ = Smoothness::kC2;
  p.f_ = [](double x) { return x; };
  p.d1_ = [](double) { return 1.0; };
  p.d2_ = [](double) { return 0.0; };
  p.lipschitz_bound_ = 1.0;
  p.label_ = "forward";
  return p;
}

Payoff Payoff::constant(double value) {
  if (!std::isfinite(value)) {
    throw ConfigError("constant payoff value must be finite");
  }
  Payoff p;
  p.kind_ = Kind::kConstant;
  p.smoothness_ = Smoothness::kC2;
  p.f_ = [value](double) { return value; };
  p.d1_ = [](double) { return 0.0; };
  p.d2_ = [](double) { return 0.0; };
  p.lipschitz_bound_ = 0.0;
  p.label_ = "constant";
  return p;
}

Payoff Payoff::softplus_call(double strike, double width) {
  if (!(strike > 0.0) || !std::isfinite(strike)) {
    throw ConfigError("softplus strike must be positive and finite");
  }
  if (!(width > 0.0) || !std::isfinite(width)) {
    throw ConfigError("softplus width must be positive and finite");
  }
  Payoff p;
  p.kind_ = Kind::kSoftplusCall;
  p.smoothness_ = Smoothness::kC2;
  p.f_ = [strike, width](double x) {
    return width * softplus((x - strike) / width);
  };
  p.d1_ = [strike, width](double x) { return sigmoid((x - strike) / width); };
  p.d2_ = [strike, width](double x) {
    // sigmoid(z) sigmoid(-z) without the 1 - s cancellation (s rounds to 1
    // beyond z ~ 37): symmetric form e^{-|z|} / (1 + e^{-|z|})^2.
    const double e = std::exp(-std::abs((x - strike) / width));
    return e / ((1.0 + e) * (1.0 + e)) / width;
  };
  p.lipschitz_bound_ = 1.0;
  p.strike_ = strike;
  p.has_strike_ = true;
  p.label_ = "softplus_call";
  return p;
}

Payoff Payoff::table(std::vector<double> xs, std::vector<double> ys) {
  if (xs.size() != ys.size() || xs.size() < 2) {
    throw ConfigError("table payoff needs matching xs/ys with >= 2 knots");
  }
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (!std::isfinite(xs[i]) || !std::isfinite(ys[i])) {
      throw ConfigError("table payoff knots must be finite");
    }
    if (i > 0 && !(xs[i] > xs[i - 1])) {
      throw ConfigError("table payoff xs must be strictly increasing");
    }
  }
  std::vector<double> slopes(xs.size() - 1);
  double lip = 0.0;
  for (std::size_t i = 0; i + 1 < xs.size(); ++i) {
    slopes[i] = (ys[i + 1] - ys[i]) / (xs[i + 1] - xs[i]);
    lip = std::max(lip, std::abs(slopes[i]));
  }
  auto seg = [xs](double x) -> std::size_t {
    // Segment index clamped so extrapolation reuses the end slopes.
    const auto it = std::upper_bound(xs.begin(), xs.end(), x);
    const std::size_t j = static_cast<std::size_t>(it - xs.begin());
    if (j == 0) return 0;
    return std::min(j - 1, xs.size() - 2);
  };
  Payoff p;
  p.kind_ = Kind::kTable;
  p.smoothness_ = Smoothness::kLipschitz;
  p.f_ = [xs, ys, slopes, seg](double x) {
    const std::size_t j = seg(x);
    return ys[j] + slopes[j] * (x - xs[j]);
  };
  p.d1_ = [slopes, seg](double x) { return slopes[seg(x)]; };
  p.kinks_.assign(xs.begin() + 1, xs.end() - 1);
  p.lipschitz_bound_ = lip;
  p.label_ = "table";
  return p;
}

Payoff Payoff::custom(std::function<double(double)> f,
                      std::function<double(double)> d1,
                      std::function<double(double)> d2, Smoothness smoothness,
                      std::vector<double> kinks, double lipschitz_bound,
                      std::string label) {
  if (!f) {
    throw ConfigError("custom payoff requires a value function");
  }
  if (smoothness == Smoothness::kC2 && (!d1 || !d2)) {
    throw ConfigError("C2 custom payoff requires both derivatives");
  }
  if (!(lipschitz_bound >= 0.0) || !std::isfinite(lipschitz_bound)) {
    throw ConfigError("custom payoff Lipschitz bound must be finite and >= 0");
  }
  Payoff p;
  p.kind_ = Kind::kCustom;
  p.smoothness_ = smoothness;
  p.f_ = std::move(f);
  p.d1_ = std::move(d1);
  p.d2_ = std::move(d2);
  p.kinks_ = std::move(kinks);
  std::sort(p.kinks_.begin(), p.kinks_.end());
  p.lipschitz_bound_ = lipschitz_bound;
  p.label_ = std::move(label);
  return p;
}

double Payoff::operator()(double x) const { return f_(x); }

double Payoff::d1(double x) const {
  if (!d1_) {
    throw CapabilityError("payoff '" + label_ + "' has no first derivative");
  }
  return d1_(x);
}

double Payoff::d2(double x) const {
  if (smoothness_ != Smoothness::kC2 || !d2_) {
    throw CapabilityError("payoff '" + label_ +
                          "' is not C2; second derivative unavailable");
  }
  return d2_(x);
}

double Payoff::strike() const {
  if (!has_strike_) {
    throw ConfigError("payoff '" + label_ + "' has no strike");
  }
  return strike_;
}

}  // namespace errcal::bs
