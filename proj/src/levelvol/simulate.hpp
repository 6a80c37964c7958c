#pragma once

#include <cstdint>
#include <vector>

#include "core/grid.hpp"
#include "levelvol/model.hpp"

namespace errcal::lv {

// ============================================================================
// Euler simulation of the market X together with the auxiliary processes of
// the error calculus:
//   M_t = exp{ int_0^t K dB - 1/2 int K^2 ds + int r ds }   (first variation)
//   I_t = int_0^t X_s^2 sigma_s^2 / M_s^2 ds                 (variance integral)
// so that Gamma[X_t] = M_t^2 I_t.  All integrals are left-point sums on the
// scheme grid, matching the discrete quadratic variation of the scheme.
// ============================================================================

/// Excursion cap: a path with |log(X/x0)| beyond this is declared exploded.
inline constexpr double kLogExcursionCap = 20.0;

/// One path of (X, M, K, L, I) at every grid node.  k and l hold the factors
/// K(t_k, X_k) and L(t_k, X_k) evaluated along the path.
struct AuxPath {
  std::vector<double> x;
  std::vector<double> m;
  std::vector<double> k;
  std::vector<double> l;
  std::vector<double> i_int;
  bool exploded = false;
  std::size_t explode_step = 0;
};

/// Simulates one path from the given increments (db.size() == grid.steps()).
/// An excursion with |log(X/x0)| > 20 or X <= 0 marks the path exploded at
/// the first offending step; values from that step on are frozen.
[[nodiscard]] AuxPath simulate_aux_path(const LocalVolModel& model,
                                        const TimeGrid& grid,
                                        const std::vector<double>& db);

/// Simulates n_paths independent paths from the deterministic counter stream
/// for (seed, path index).
[[nodiscard]] std::vector<AuxPath> simulate_aux(const LocalVolModel& model,
                                                const TimeGrid& grid,
                                                std::size_t n_paths,
                                                std::uint64_t seed);

}  // namespace errcal::lv
