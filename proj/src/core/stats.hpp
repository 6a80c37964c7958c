#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "core/errors.hpp"

namespace errcal::num {

/// Streaming mean / variance accumulator (Welford).
class RunningStats {
 public:
  void add(double x) {
    ++n_;
    const double d = x - mean_;
    mean_ += d / static_cast<double>(n_);
    m2_ += d * (x - mean_);
  }

  [[nodiscard]] std::size_t count() const { return n_; }
  [[nodiscard]] double mean() const { return mean_; }

  [[nodiscard]] double variance() const {
    return n_ > 1 ? m2_ / static_cast<double>(n_ - 1) : 0.0;
  }

  [[nodiscard]] double std_error() const {
    return n_ > 1 ? std::sqrt(variance() / static_cast<double>(n_)) : 0.0;
  }

 private:
  std::size_t n_ = 0;
  double mean_ = 0.0;
  double m2_ = 0.0;
};

/// Mean and standard error of a sample, accumulated in index order so the
/// result does not depend on how the sample was produced in parallel.
struct MeanSE {
  double mean = 0.0;
  double se = 0.0;
  std::size_t n = 0;
};

[[nodiscard]] inline MeanSE mean_se(const std::vector<double>& xs) {
  RunningStats stats;
  for (double x : xs) stats.add(x);
  return {stats.mean(), stats.std_error(), stats.count()};
}

/// Through-origin least squares y = slope * x; standard error from residuals.
struct SlopeFit {
  double slope = 0.0;
  double se = 0.0;
};

[[nodiscard]] inline SlopeFit fit_slope_through_origin(
    const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 3) {
    throw ConfigError("fit_slope_through_origin: need matched samples, n >= 3");
  }
  double sxx = 0.0;
  double sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  if (sxx <= 0.0) {
    throw NumericError("fit_slope_through_origin: degenerate regressor");
  }
  SlopeFit fit;
  fit.slope = sxy / sxx;
  double ss_res = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double r = y[i] - fit.slope * x[i];
    ss_res += r * r;
  }
  const auto n = static_cast<double>(x.size());
  fit.se = std::sqrt(ss_res / (n - 1.0) / sxx);
  return fit;
}

}  // namespace errcal::num
