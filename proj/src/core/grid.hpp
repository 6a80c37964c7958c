#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "core/errors.hpp"

namespace errcal {

/// Strictly increasing time grid t_0 = 0 < t_1 < ... < t_n = horizon.
class TimeGrid {
 public:
  TimeGrid(double horizon, std::size_t n_steps) {
    if (!(horizon > 0.0) || !std::isfinite(horizon)) {
      throw ConfigError("TimeGrid: horizon must be positive and finite");
    }
    if (n_steps == 0) throw ConfigError("TimeGrid: need at least one step");
    times_.resize(n_steps + 1);
    for (std::size_t k = 0; k <= n_steps; ++k) {
      times_[k] = horizon * static_cast<double>(k) / static_cast<double>(n_steps);
    }
    times_.back() = horizon;
  }

  [[nodiscard]] std::size_t steps() const { return times_.size() - 1; }
  [[nodiscard]] double horizon() const { return times_.back(); }
  [[nodiscard]] double time(std::size_t k) const { return times_[k]; }
  [[nodiscard]] double dt(std::size_t k) const {
    return times_[k + 1] - times_[k];
  }
  [[nodiscard]] const std::vector<double>& times() const { return times_; }

  /// Index of the grid node equal to t (within one part in 1e-9 of a step).
  /// Quantities like Gamma[B_t] are exact only at grid nodes, so a time off
  /// the grid is an input error rather than silently interpolated.
  [[nodiscard]] std::size_t index_of(double t) const {
    const double h = horizon() / static_cast<double>(steps());
    const double pos = t / h;
    const auto k = static_cast<std::size_t>(std::llround(pos));
    if (k > steps() || std::fabs(pos - static_cast<double>(k)) > 1e-9) {
      throw ConfigError("TimeGrid: time is not a grid node");
    }
    return k;
  }

 private:
  std::vector<double> times_;
};

}  // namespace errcal
