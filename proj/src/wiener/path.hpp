#pragma once

#include <cstdint>
#include <vector>

#include "core/grid.hpp"

namespace errcal::wiener {

// ============================================================================
// Brownian path bundles.  A bundle never stores increments: each path is a
// pure function of (seed, path index), so bundles of any size cost O(1)
// memory, parallel generation is trivially deterministic, and a perturbed
// bundle is just a pair of mixing coefficients over the same draws.
// ============================================================================

/// Increments of one path and its companion on the bundle grid.
struct PathIncrements {
  std::vector<double> db;
  std::vector<double> db_hat;
};

class PathBundle {
 public:
  PathBundle(const TimeGrid& grid, std::size_t n_paths, std::uint64_t seed);

  [[nodiscard]] const TimeGrid& grid() const { return grid_; }
  [[nodiscard]] std::size_t n_paths() const { return n_paths_; }
  [[nodiscard]] std::uint64_t seed() const { return seed_; }

  /// Mixing state: dB' = coeff_orig * dB + coeff_comp * dBhat.
  [[nodiscard]] double coeff_orig() const { return coeff_orig_; }
  [[nodiscard]] double coeff_comp() const { return coeff_comp_; }

  /// Materializes path i into out (resized as needed).
  void fill(std::size_t path, PathIncrements& out) const;

  /// Brownian values B_{t_0..t_n} (B_0 = 0) for path i.
  [[nodiscard]] std::vector<double> brownian(std::size_t path) const;

 private:
  friend PathBundle ou_perturb(const PathBundle&, double, int);

  TimeGrid grid_;
  std::size_t n_paths_;
  std::uint64_t seed_;
  double coeff_orig_ = 1.0;
  double coeff_comp_ = 0.0;
};

/// Fresh unperturbed bundle.
[[nodiscard]] PathBundle sample_paths(const TimeGrid& grid,
                                      std::size_t n_paths, std::uint64_t seed);

/// Resampling perturbation of magnitude theta >= 0:
///   dB' = sqrt(e^{-theta}) dB + companion_sign * sqrt(1 - e^{-theta}) dBhat
/// applied on top of the bundle's current mixing state.  theta = 0 is the
/// identity; theta -> infinity converges to the (signed) companion.
[[nodiscard]] PathBundle ou_perturb(const PathBundle& bundle, double theta,
                                    int companion_sign = +1);

/// Cumulative sum with a leading zero: increments -> values at grid nodes.
[[nodiscard]] std::vector<double> cumulate(const std::vector<double>& inc);

}  // namespace errcal::wiener
