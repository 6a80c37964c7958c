#include "levelvol/simulate.hpp"

#include <cmath>

#include "core/parallel.hpp"
#include "wiener/path.hpp"

namespace errcal::lv {

AuxPath simulate_aux_path(const LocalVolModel& model, const TimeGrid& grid,
                          const std::vector<double>& db) {
  const std::size_t n = grid.steps();
  if (db.size() != n) {
    throw ConfigError("simulate_aux_path: increment count does not match grid");
  }
  AuxPath path;
  path.x.resize(n + 1);
  path.m.resize(n + 1);
  path.k.resize(n + 1);
  path.l.resize(n + 1);
  path.i_int.resize(n + 1);

  double x = model.x0;
  double logm = 0.0;
  double i_int = 0.0;
  path.x[0] = x;
  path.m[0] = 1.0;
  path.k[0] = model.k_factor(0.0, x);
  path.l[0] = model.l_factor(0.0, x);
  path.i_int[0] = 0.0;

  for (std::size_t k = 0; k < n; ++k) {
    const double t = grid.time(k);
    const double dt = grid.dt(k);
    const double s = model.sigma.value(t, x);
    const double kf = model.k_factor(t, x);
    const double r = model.rate(t);
    const double m = std::exp(logm);

    const double x_next = x + x * (r * dt + s * db[k]);
    const double logm_next = logm + kf * db[k] + (r - 0.5 * kf * kf) * dt;
    if (!(x_next > 0.0) || !std::isfinite(x_next) ||
        std::fabs(std::log(x_next / model.x0)) > kLogExcursionCap ||
        !std::isfinite(logm_next)) {
      path.exploded = true;
      path.explode_step = k + 1;
      for (std::size_t j = k + 1; j <= n; ++j) {
        path.x[j] = x;
        path.m[j] = m;
        path.k[j] = path.k[k];
        path.l[j] = path.l[k];
        path.i_int[j] = i_int;
      }
      return path;
    }

    i_int += x * x * s * s / (m * m) * dt;
    x = x_next;
    logm = logm_next;
    const double t_next = grid.time(k + 1);
    path.x[k + 1] = x;
    path.m[k + 1] = std::exp(logm);
    path.k[k + 1] = model.k_factor(t_next, x);
    path.l[k + 1] = model.l_factor(t_next, x);
    path.i_int[k + 1] = i_int;
  }
  return path;
}

std::vector<AuxPath> simulate_aux(const LocalVolModel& model,
                                  const TimeGrid& grid, std::size_t n_paths,
                                  std::uint64_t seed) {
  model.validate();
  const auto bundle = wiener::sample_paths(grid, n_paths, seed);
  std::vector<AuxPath> out(n_paths);
  parallel_for(n_paths, [&](std::size_t p) {
    wiener::PathIncrements inc;
    bundle.fill(p, inc);
    out[p] = simulate_aux_path(model, grid, inc.db);
  });
  return out;
}

}  // namespace errcal::lv
