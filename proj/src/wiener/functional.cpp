#include "wiener/functional.hpp"

#include <cmath>

#include "core/errors.hpp"
#include "core/parallel.hpp"
#include "core/philox.hpp"
#include "core/quad.hpp"
#include "core/stats.hpp"

namespace errcal::wiener {

double sharp_wiener_integral(const std::function<double(double)>& h,
                             const Kernel& kernel,
                             const std::vector<double>& db_hat,
                             const TimeGrid& grid) {
  if (!h) throw ConfigError("sharp_wiener_integral: integrand required");
  if (db_hat.size() != grid.steps()) {
    throw ConfigError("sharp_wiener_integral: increment/grid size mismatch");
  }
  double acc = 0.0;
  for (std::size_t k = 0; k < db_hat.size(); ++k) {
    const double t = grid.time(k);
    acc += std::sqrt(kernel.sharp_weight(t)) * h(t) * db_hat[k];
  }
  if (!std::isfinite(acc)) {
    throw NumericError("sharp_wiener_integral: non-finite result");
  }
  return acc;
}

PerturbCheckResult perturb_check(const BrownianFunctional& functional,
                                 const PathClosedForm& closed_gamma,
                                 const PathClosedForm* closed_bias,
                                 const TimeGrid& grid, std::size_t n_paths,
                                 double theta, std::uint64_t seed) {
  if (!functional || !closed_gamma) {
    throw ConfigError("perturb_check: functional and closed gamma required");
  }
  if (!(theta > 0.0) || !std::isfinite(theta)) {
    throw ConfigError("perturb_check: theta must be positive and finite");
  }
  if (n_paths < 16) throw ConfigError("perturb_check: too few paths");

  const PathBundle base = sample_paths(grid, n_paths, seed);
  const PathBundle up = ou_perturb(base, theta, +1);
  const PathBundle dn = ou_perturb(base, theta, -1);

  std::vector<double> emp(n_paths), closed(n_paths);
  std::vector<double> bias_y(closed_bias ? n_paths : 0);
  std::vector<double> bias_a(closed_bias ? n_paths : 0);

  parallel_for(n_paths, [&](std::size_t i) {
    PathIncrements inc;
    base.fill(i, inc);
    const std::vector<double> b0 = cumulate(inc.db);
    up.fill(i, inc);
    const std::vector<double> bp = cumulate(inc.db);
    dn.fill(i, inc);
    const std::vector<double> bm = cumulate(inc.db);

    const double f0 = functional(b0, grid);
    const double dp = functional(bp, grid) - f0;
    const double dm = functional(bm, grid) - f0;
    emp[i] = 0.5 * (dp * dp + dm * dm) / theta;
    closed[i] = closed_gamma(b0, grid);
    if (closed_bias) {
      bias_y[i] = 0.5 * (dp + dm) / theta;
      bias_a[i] = (*closed_bias)(b0, grid);
    }
  });

  PerturbCheckResult result;
  const num::MeanSE m_emp = num::mean_se(emp);
  const num::MeanSE m_closed = num::mean_se(closed);
  result.gamma.empirical = m_emp.mean;
  result.gamma.empirical_se = m_emp.se;
  result.gamma.closed = m_closed.mean;
  result.gamma.closed_se = m_closed.se;
  std::vector<double> diff(n_paths);
  for (std::size_t i = 0; i < n_paths; ++i) diff[i] = emp[i] - closed[i];
  const num::MeanSE m_diff = num::mean_se(diff);
  result.gamma.diff = m_diff.mean;
  result.gamma.diff_se = m_diff.se;
  result.gamma.n_paths = n_paths;

  if (closed_bias) {
    const num::SlopeFit fit = num::fit_slope_through_origin(bias_a, bias_y);
    PerturbBiasResult bias;
    bias.slope = fit.slope;
    bias.slope_se = fit.se;
    bias.n_paths = n_paths;
    result.bias = bias;
  }
  return result;
}

std::vector<double> clark_integrand_brownian(
    const std::function<double(double)>& g_prime, const std::vector<double>& b,
    const TimeGrid& grid, int nodes) {
  if (!g_prime) throw ConfigError("clark_integrand_brownian: g' required");
  if (b.size() != grid.steps() + 1) {
    throw ConfigError("clark_integrand_brownian: path/grid size mismatch");
  }
  const double horizon = grid.horizon();
  std::vector<double> integrand(grid.steps() + 1);
  for (std::size_t k = 0; k <= grid.steps(); ++k) {
    const double rem = horizon - grid.time(k);
    if (rem <= 0.0) {
      integrand[k] = g_prime(b[k]);
      continue;
    }
    const double sd = std::sqrt(rem);
    const double bk = b[k];
    integrand[k] = num::expect_normal(
        [&g_prime, bk, sd](double z) { return g_prime(bk + sd * z); }, nodes);
  }
  return integrand;
}

std::vector<double> clark_integrand_lognormal(
    double s0, double sigma, double r,
    const std::function<double(double, double)>& delta,
    const std::vector<double>& b, const TimeGrid& grid) {
  if (!delta) throw ConfigError("clark_integrand_lognormal: delta required");
  if (!(s0 > 0.0) || !(sigma > 0.0)) {
    throw ConfigError("clark_integrand_lognormal: need s0 > 0, sigma > 0");
  }
  if (b.size() != grid.steps() + 1) {
    throw ConfigError("clark_integrand_lognormal: path/grid size mismatch");
  }
  const double horizon = grid.horizon();
  std::vector<double> integrand(grid.steps() + 1);
  for (std::size_t k = 0; k <= grid.steps(); ++k) {
    const double t = grid.time(k);
    const double s =
        s0 * std::exp(sigma * b[k] + (r - 0.5 * sigma * sigma) * t);
    integrand[k] = std::exp(r * (horizon - t)) * sigma * s * delta(t, s);
  }
  return integrand;
}

double lipschitz_estimate(const std::function<double(double)>& f, double lo,
                          double hi, std::size_t n, std::uint64_t seed) {
  if (!f) throw ConfigError("lipschitz_estimate: function required");
  if (!(hi > lo)) throw ConfigError("lipschitz_estimate: empty interval");
  double worst = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const rng::GaussianBlock block(seed, rng::Stream::kScratch, i, 0);
    const double x = lo + (hi - lo) * block.uniform(0);
    const double y = lo + (hi - lo) * block.uniform(1);
    if (x == y) continue;
    const double q = std::fabs((f(x) - f(y)) / (x - y));
    if (q > worst) worst = q;
  }
  return worst;
}

}  // namespace errcal::wiener
