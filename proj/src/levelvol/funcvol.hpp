#pragma once

#include <cstdint>
#include <vector>

#include "core/stats.hpp"
#include "levelvol/model.hpp"

namespace errcal::lv {

// ============================================================================
// Sensitivity of X_t to independent proportional errors on the coefficients
// of a polynomial volatility surface sigma(t, x) = sum a_pq t^p x^q:
//   Gamma[X_t] = M_t^2 sum_pq a_pq^2 ( int_0^t s^p X_s^{q+1} / M_s
//                                      (dB_s - K_s ds) )^2
// with every integral a left-point sum on the scheme grid.  The quadratic
// form is evaluated on paths simulated under the model's own sigma, so the
// coefficient list passed here may differ from the surface that generated
// the paths; that separation is what makes homogeneity checks exact
// pathwise (scaling every a_pq by c scales each path's Gamma by c^2).
// ============================================================================

struct FuncVolResult {
  std::vector<double> gamma;  // Gamma[X_t] per surviving path
  num::MeanSE gamma_mean;
  std::size_t n_dropped = 0;
};

[[nodiscard]] FuncVolResult functional_vol_sensitivity(
    const LocalVolModel& model, const std::vector<PolyTerm>& terms, double t,
    std::size_t n_steps, std::size_t n_paths, std::uint64_t seed);

}  // namespace errcal::lv
