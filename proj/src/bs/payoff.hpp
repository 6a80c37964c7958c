#pragma once

#include <functional>
#include <string>
#include <vector>

namespace errcal::bs {

/// Regularity class of a payoff, gating the hedge-side sensitivities.
enum class Smoothness {
  kLipschitz,  // f Lipschitz, derivative defined almost everywhere
  kC2,         // f twice continuously differentiable with bounded f', f''
};

/// Terminal payoff f(S_T) with optional derivatives and kink bookkeeping.
/// Kinks are abscissae where f' jumps; quadratures split there.
class Payoff {
 public:
  enum class Kind {
    kCall,
    kPut,
    kForward,
    kConstant,
    kSoftplusCall,
    kTable,
    kCustom,
  };

  [[nodiscard]] static Payoff call(double strike);
  [[nodiscard]] static Payoff put(double strike);
  [[nodiscard]] static Payoff forward();
  [[nodiscard]] static Payoff constant(double value);
  /// Softplus-smoothed call: f(x) = w log(1 + exp((x - strike)/w)), C^inf,
  /// Lipschitz constant 1, uniformly close to the call as w -> 0.
  [[nodiscard]] static Payoff softplus_call(double strike, double width);
  /// Piecewise-linear interpolation of (xs, ys); extrapolates with the end
  /// slopes; xs strictly increasing.
  [[nodiscard]] static Payoff table(std::vector<double> xs,
                                    std::vector<double> ys);
  [[nodiscard]] static Payoff custom(std::function<double(double)> f,
                                     std::function<double(double)> d1,
                                     std::function<double(double)> d2,
                                     Smoothness smoothness,
                                     std::vector<double> kinks,
                                     double lipschitz_bound,
                                     std::string label = "custom");

  [[nodiscard]] double operator()(double x) const;

  /// First derivative (a.e. value at kinks); available for every kind.
  [[nodiscard]] double d1(double x) const;

  /// Second derivative; CapabilityError unless smoothness() == kC2.
  [[nodiscard]] double d2(double x) const;

  [[nodiscard]] Kind kind() const { return kind_; }
  [[nodiscard]] Smoothness smoothness() const { return smoothness_; }
  [[nodiscard]] const std::vector<double>& kinks() const { return kinks_; }
  [[nodiscard]] double lipschitz_bound() const { return lipschitz_bound_; }
  [[nodiscard]] const std::string& label() const { return label_; }
  [[nodiscard]] double strike() const;  // ConfigError if kind has none

 private:
  Payoff() = default;

  Kind kind_ = Kind::kCustom;
  Smoothness smoothness_ = Smoothness::kLipschitz;
  std::function<double(double)> f_;
  std::function<double(double)> d1_;
  std::function<double(double)> d2_;
  std::vector<double> kinks_;
  double lipschitz_bound_ = 0.0;
  double strike_ = 0.0;
  bool has_strike_ = false;
  std::string label_;
};

}  // namespace errcal::bs
