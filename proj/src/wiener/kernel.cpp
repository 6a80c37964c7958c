#include "wiener/kernel.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

#include "core/errors.hpp"
#include "core/normal.hpp"

namespace errcal::wiener {

namespace {

// Trapezoid over [a, b] with n panels.
double trapezoid(const std::function<double(double)>& f, double a, double b,
                 int n) {
  if (!(b > a)) return 0.0;
  const double h = (b - a) / n;
  double acc = 0.5 * (f(a) + f(b));
  for (int k = 1; k < n; ++k) acc += f(a + k * h);
  return acc * h;
}

class OuKernel final : public Kernel {
 public:
  [[nodiscard]] std::string name() const override { return "ou"; }

  [[nodiscard]] double gamma_indicator(double t) const override {
    if (!(t >= 0.0) || !std::isfinite(t)) {
      throw ConfigError("ou kernel: t must be nonnegative");
    }
    return t;
  }

  [[nodiscard]] double gamma_l2(const std::function<double(double)>& h,
                                const TimeGrid& grid) const override {
    return trapezoid([&h](double s) { const double v = h(s); return v * v; },
                     0.0, grid.horizon(), static_cast<int>(grid.steps()));
  }

  [[nodiscard]] double gamma_indicator_cross(double s, double t) const override {
    return gamma_indicator(std::min(s, t));
  }

  [[nodiscard]] double sharp_weight(double) const override { return 1.0; }
  [[nodiscard]] double truncation_error(double) const override { return 0.0; }
};

class WeightedOuKernel final : public Kernel {
 public:
  WeightedOuKernel(std::function<double(double)> alpha, int quad_steps)
      : alpha_(std::move(alpha)), quad_steps_(quad_steps) {
    if (!alpha_) throw ConfigError("weighted kernel: alpha required");
    if (quad_steps_ < 1) throw ConfigError("weighted kernel: quad_steps < 1");
  }

  [[nodiscard]] std::string name() const override { return "weighted_ou"; }

  [[nodiscard]] double gamma_indicator(double t) const override {
    if (!(t >= 0.0) || !std::isfinite(t)) {
      throw ConfigError("weighted kernel: t must be nonnegative");
    }
    if (t == 0.0) return 0.0;
    return trapezoid([this](double s) { return checked_alpha(s); }, 0.0, t,
                     quad_steps_);
  }

  [[nodiscard]] double gamma_l2(const std::function<double(double)>& h,
                                const TimeGrid& grid) const override {
    return trapezoid(
        [this, &h](double s) {
          const double v = h(s);
          return checked_alpha(s) * v * v;
        },
        0.0, grid.horizon(), static_cast<int>(grid.steps()));
  }

  [[nodiscard]] double gamma_indicator_cross(double s, double t) const override {
    return gamma_indicator(std::min(s, t));
  }

  [[nodiscard]] double sharp_weight(double t) const override {
    return checked_alpha(t);
  }

  [[nodiscard]] double truncation_error(double) const override { return 0.0; }

 private:
  [[nodiscard]] double checked_alpha(double s) const {
    const double a = alpha_(s);
    if (!(a >= 0.0) || !std::isfinite(a)) {
      throw NumericError("weighted kernel: alpha must be nonnegative finite");
    }
    return a;
  }

  std::function<double(double)> alpha_;
  int quad_steps_;
};

class BetaKernel final : public Kernel {
 public:
  BetaKernel(std::function<double(double)> beta, double upper, int quad_steps)
      : beta_(std::move(beta)), upper_(upper), quad_steps_(quad_steps) {
    if (!beta_) throw ConfigError("beta kernel: beta required");
    if (!(upper_ > 0.0) || !std::isfinite(upper_)) {
      throw ConfigError("beta kernel: upper limit must be positive finite");
    }
    if (quad_steps_ < 1) throw ConfigError("beta kernel: quad_steps < 1");
  }

  [[nodiscard]] std::string name() const override { return "beta"; }

  [[nodiscard]] double gamma_indicator(double t) const override {
    if (!(t >= 0.0) || !std::isfinite(t)) {
      throw ConfigError("beta kernel: t must be nonnegative");
    }
    if (t >= upper_) {
      throw ConfigError("beta kernel: t must lie below the beta support bound");
    }
    const auto b = [this](double s) { return checked_beta(s); };
    const double head = t > 0.0 ? trapezoid(b, 0.0, t, quad_steps_) : 0.0;
    const double tail = trapezoid(b, t, upper_, quad_steps_);
    return 2.0 * head * tail;
  }

  [[nodiscard]] double truncation_error(double) const override { return 0.0; }

 private:
  [[nodiscard]] double checked_beta(double s) const {
    const double v = beta_(s);
    if (!(v >= 0.0) || !std::isfinite(v)) {
      throw NumericError("beta kernel: beta must be nonnegative finite");
    }
    return v;
  }

  std::function<double(double)> beta_;
  double upper_;
  int quad_steps_;
};

class FractionalKernel final : public Kernel {
 public:
  FractionalKernel(double q, long truncation) : q_(q), truncation_(truncation) {
    if (!(q > 0.0 && q < 0.5)) {
      throw ConfigError("fractional kernel: q must lie in (0, 1/2)");
    }
    if (truncation_ < 10) {
      throw ConfigError("fractional kernel: truncation too small");
    }
  }

  [[nodiscard]] std::string name() const override { return "fractional"; }

  [[nodiscard]] double gamma_indicator(double t) const override {
    check_t(t);
    if (t == 0.0 || t == 1.0) return 0.0;
    const double p = 2.0 * (1.0 - q_);
    const double two_pi = 2.0 * num::kPi;
    double acc = 0.0;
    // Summed downward so the small high-n terms accumulate first.
    for (long n = truncation_; n >= 1; --n) {
      const double dn = static_cast<double>(n);
      acc += 4.0 * (1.0 - std::cos(two_pi * dn * t)) / std::pow(two_pi * dn, p);
    }
    // Monotone part of the tail sum_{n>N} 4 (2 pi n)^{-p}: integral plus
    // Euler-Maclaurin half-term.  The oscillatory part is folded into the
    // reported truncation_error instead of the value.
    const double dn = static_cast<double>(truncation_);
    const double tail_int =
        4.0 * std::pow(two_pi, -p) * std::pow(dn, 1.0 - p) / (p - 1.0);
    const double tail_half = 2.0 * std::pow(two_pi * dn, -p);
    return acc + tail_int + tail_half;
  }

  [[nodiscard]] double truncation_error(double t) const override {
    check_t(t);
    if (t == 0.0 || t == 1.0) return 0.0;
    const double p = 2.0 * (1.0 - q_);
    const double dn = static_cast<double>(truncation_);
    const double head = 4.0 * std::pow(2.0 * num::kPi * dn, -p);
    // Abel bound for the cosine tail plus the Euler-Maclaurin residual.
    const double s = std::sin(num::kPi * std::min(t, 1.0 - t));
    return head * (0.5 + 1.0 / std::max(s, 1e-12));
  }

 private:
  static void check_t(double t) {
    if (!(t >= 0.0 && t <= 1.0)) {
      throw ConfigError("fractional kernel: t must lie in [0, 1]");
    }
  }

  double q_;
  long truncation_;
};

}  // namespace

double Kernel::gamma_l2(const std::function<double(double)>&,
                        const TimeGrid&) const {
  throw CapabilityError(name() + " kernel: generic integrands not supported");
}

double Kernel::gamma_indicator_cross(double, double) const {
  throw CapabilityError(name() +
                        " kernel: no bilinear indicator form; cross-time "
                        "Gamma unsupported");
}

double Kernel::sharp_weight(double) const {
  throw CapabilityError(name() + " kernel: no sharp-integral representation");
}

double Kernel::truncation_error(double) const { return 0.0; }

std::shared_ptr<Kernel> make_ou_kernel() { return std::make_shared<OuKernel>(); }

std::shared_ptr<Kernel> make_weighted_ou_kernel(
    std::function<double(double)> alpha, int quad_steps) {
  return std::make_shared<WeightedOuKernel>(std::move(alpha), quad_steps);
}

std::shared_ptr<Kernel> make_beta_kernel(std::function<double(double)> beta,
                                         double upper, int quad_steps) {
  return std::make_shared<BetaKernel>(std::move(beta), upper, quad_steps);
}

std::shared_ptr<Kernel> make_fractional_kernel(double q, long truncation) {
  return std::make_shared<FractionalKernel>(q, truncation);
}

}  // namespace errcal::wiener
