#include "levelvol/funcvol.hpp"

#include <cmath>

#include "core/grid.hpp"
#include "core/parallel.hpp"
#include "levelvol/simulate.hpp"
#include "wiener/path.hpp"

namespace errcal::lv {

FuncVolResult functional_vol_sensitivity(const LocalVolModel& model,
                                         const std::vector<PolyTerm>& terms,
                                         double t, std::size_t n_steps,
                                         std::size_t n_paths,
                                         std::uint64_t seed) {
  model.validate();
  if (terms.empty()) {
    throw ConfigError("functional_vol_sensitivity needs at least one term");
  }
  for (const auto& term : terms) {
    if (term.p < 0 || term.q < 0 || !std::isfinite(term.a)) {
      throw ConfigError("coefficient term needs p >= 0, q >= 0, finite a");
    }
  }
  if (n_paths == 0) {
    throw ConfigError("functional_vol_sensitivity needs n_paths >= 1");
  }
  const TimeGrid grid(model.horizon, n_steps);
  const std::size_t j = grid.index_of(t);
  const auto bundle = wiener::sample_paths(grid, n_paths, seed);

  std::vector<double> gamma(n_paths);
  std::vector<char> ok(n_paths, 0);
  parallel_for(n_paths, [&](std::size_t p) {
    wiener::PathIncrements inc;
    bundle.fill(p, inc);
    const AuxPath aux = simulate_aux_path(model, grid, inc.db);
    if (aux.exploded && aux.explode_step <= j) return;
    std::vector<double> integral(terms.size(), 0.0);
    for (std::size_t k = 0; k < j; ++k) {
      const double s = grid.time(k);
      const double dt = grid.dt(k);
      const double weight = (inc.db[k] - aux.k[k] * dt) / aux.m[k];
      for (std::size_t i = 0; i < terms.size(); ++i) {
        integral[i] += std::pow(s, terms[i].p) *
                       std::pow(aux.x[k], terms[i].q + 1) * weight;
      }
    }
    double form = 0.0;
    for (std::size_t i = 0; i < terms.size(); ++i) {
      form += terms[i].a * terms[i].a * integral[i] * integral[i];
    }
    gamma[p] = aux.m[j] * aux.m[j] * form;
    ok[p] = 1;
  });

  FuncVolResult out;
  for (std::size_t p = 0; p < n_paths; ++p) {
    if (!ok[p]) {
      ++out.n_dropped;
      continue;
    }
    out.gamma.push_back(gamma[p]);
  }
  if (out.gamma.empty()) {
    throw NumericError("all paths exploded before t in "
                       "functional_vol_sensitivity");
  }
  out.gamma_mean = num::mean_se(out.gamma);
  return out;
}

}  // namespace errcal::lv
