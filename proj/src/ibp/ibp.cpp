#include "ibp/ibp.hpp"

#include <cmath>
#include <string>

#include "core/errors.hpp"
#include "core/normal.hpp"
#include "core/parallel.hpp"
#include "core/philox.hpp"

namespace errcal::ibp {

namespace {

constexpr double kGuardBand = 1e-12;
constexpr int kMaxResample = 64;
constexpr double kXiPrimeFloor = 1e-8;
constexpr std::size_t kMaxSteps = 1u << 24;  // step index shares the word
                                             // with the resample counter

double checked_uniform(std::uint64_t seed, std::uint64_t sample,
                       std::size_t step) {
  for (int attempt = 0; attempt < kMaxResample; ++attempt) {
    const auto code = static_cast<std::uint32_t>(
        step | (static_cast<std::size_t>(attempt) << 24));
    const double u =
        rng::uniform01(seed, rng::Stream::kUniform, sample, code);
    if (u >= kGuardBand && u <= 1.0 - kGuardBand) return u;
  }
  throw NumericError("uniform draw stuck in the guard band");
}

/// dS_N / dU_n for all n, from one forward pass: the factor after step n is
/// prod_{m>n} (1 + lambda sigma'(S_{m-1}) xi(m, U_m)), accumulated backward.
std::vector<double> path_tangents(const DiscreteScheme& scheme,
                                  const std::vector<double>& u,
                                  const std::vector<double>& s) {
  const std::size_t n = scheme.n_steps;
  std::vector<double> local(n);   // dS_n / dU_n at step n
  std::vector<double> growth(n);  // 1 + lambda sigma'(S_{n-1}) xi(n, U_n)
  for (std::size_t k = 0; k < n; ++k) {
    const int step = static_cast<int>(k) + 1;
    local[k] = scheme.lambda * scheme.sigma(s[k]) *
               scheme.innov.xi_u(step, u[k]);
    growth[k] = 1.0 + scheme.lambda * scheme.sigma_dx(s[k]) *
                          scheme.innov.xi(step, u[k]);
  }
  std::vector<double> tangent(n);
  double tail = 1.0;
  for (std::size_t k = n; k-- > 0;) {
    tangent[k] = local[k] * tail;
    tail *= growth[k];
  }
  return tangent;
}

}  // namespace

Innovations gaussian_innovations() {
  Innovations innov;
  innov.xi = [](int, double u) { return num::normal_quantile(u); };
  innov.xi_u = [](int, double u) { return num::normal_quantile_d1(u); };
  innov.xi_uu = [](int, double u) { return num::normal_quantile_d2(u); };
  return innov;
}

void DiscreteScheme::validate() const {
  if (n_steps == 0 || n_steps >= kMaxSteps) {
    throw ConfigError("scheme needs 1 <= n_steps < 2^24");
  }
  if (!std::isfinite(x)) throw ConfigError("scheme start x must be finite");
  if (!(lambda > 0.0) || !std::isfinite(lambda)) {
    throw ConfigError("scheme needs lambda > 0");
  }
  if (!sigma || !sigma_dx) {
    throw ConfigError("scheme needs sigma and sigma_dx");
  }
  if (!innov.xi || !innov.xi_u || !innov.xi_uu) {
    throw ConfigError("scheme needs xi, xi_u, and xi_uu");
  }
  if (!std::isfinite(sigma(x)) || sigma(x) == 0.0) {
    throw ConfigError("scheme needs sigma(x) != 0 at the start point");
  }
}

std::vector<double> draw_uniform_row(std::size_t n_steps, std::uint64_t seed,
                                     std::uint64_t sample) {
  std::vector<double> u(n_steps);
  for (std::size_t k = 0; k < n_steps; ++k) {
    u[k] = checked_uniform(seed, sample, k);
  }
  return u;
}

std::vector<double> scheme_path(const DiscreteScheme& scheme,
                                const std::vector<double>& u) {
  if (u.size() != scheme.n_steps) {
    throw ConfigError("scheme_path: uniform row size does not match n_steps");
  }
  std::vector<double> s(scheme.n_steps + 1);
  s[0] = scheme.x;
  for (std::size_t k = 0; k < scheme.n_steps; ++k) {
    const int step = static_cast<int>(k) + 1;
    s[k + 1] = s[k] + scheme.lambda * scheme.sigma(s[k]) *
                          scheme.innov.xi(step, u[k]);
  }
  return s;
}

std::vector<double> discrete_gradient(
    const DiscreteScheme& scheme, const std::vector<double>& u,
    const std::function<double(double)>& psi_d1) {
  scheme.validate();
  if (u.size() != scheme.n_steps) {
    throw ConfigError("discrete_gradient: uniform row size mismatch");
  }
  const auto s = scheme_path(scheme, u);
  const auto tangent = path_tangents(scheme, u, s);
  const double slope = psi_d1(s.back());
  std::vector<double> grad(scheme.n_steps);
  for (std::size_t k = 0; k < scheme.n_steps; ++k) {
    grad[k] = slope * tangent[k] * u[k] * (1.0 - u[k]);
  }
  return grad;
}

IbpCheck ibp_check(const DiscreteScheme& scheme,
                   const std::function<double(double)>& psi,
                   const std::function<double(double)>& psi_d1,
                   const std::vector<double>& direction,
                   std::size_t n_samples, std::uint64_t seed) {
  scheme.validate();
  if (direction.size() != scheme.n_steps) {
    throw ConfigError("ibp_check: direction size does not match n_steps");
  }
  if (n_samples < 2) throw ConfigError("ibp_check needs n_samples >= 2");

  std::vector<double> lhs(n_samples);
  std::vector<double> rhs(n_samples);
  parallel_for(n_samples, [&](std::size_t p) {
    const auto u = draw_uniform_row(scheme.n_steps, seed, p);
    const auto grad = discrete_gradient(scheme, u, psi_d1);
    const auto s = scheme_path(scheme, u);
    double forward = 0.0;
    double divergence = 0.0;
    for (std::size_t k = 0; k < scheme.n_steps; ++k) {
      forward += direction[k] * grad[k];
      divergence += direction[k] * (1.0 - 2.0 * u[k]);
    }
    lhs[p] = forward;
    rhs[p] = -psi(s.back()) * divergence;
  });

  IbpCheck out;
  out.lhs = num::mean_se(lhs);
  out.rhs = num::mean_se(rhs);
  std::vector<double> diff(n_samples);
  for (std::size_t p = 0; p < n_samples; ++p) diff[p] = lhs[p] - rhs[p];
  out.diff = num::mean_se(diff);
  return out;
}

namespace {

/// Shared driver: weight(u, s) returns the per-sample weight or rejects by
/// returning NaN (xi_u under the floor).
WeightEstimate run_weighted(
    const DiscreteScheme& scheme, const std::function<double(double)>& psi,
    std::size_t n_samples, std::uint64_t seed,
    const std::function<double(const std::vector<double>&,
                               const std::vector<double>&)>& weight) {
  scheme.validate();
  if (n_samples < 2) throw ConfigError("weight estimate needs n_samples >= 2");

  std::vector<double> vals(n_samples);
  std::vector<double> prods(n_samples);
  std::vector<char> accept(n_samples, 0);
  parallel_for(n_samples, [&](std::size_t p) {
    const auto u = draw_uniform_row(scheme.n_steps, seed, p);
    const auto s = scheme_path(scheme, u);
    const double w = weight(u, s);
    if (std::isnan(w)) return;
    const double v = psi(s.back());
    vals[p] = v;
    prods[p] = v * w;
    accept[p] = 1;
  });

  WeightEstimate out;
  std::vector<double> vals_ok;
  std::vector<double> prods_ok;
  vals_ok.reserve(n_samples);
  prods_ok.reserve(n_samples);
  for (std::size_t p = 0; p < n_samples; ++p) {
    if (!accept[p]) {
      ++out.n_rejected;
      continue;
    }
    vals_ok.push_back(vals[p]);
    prods_ok.push_back(prods[p]);
  }
  if (out.n_rejected * 1000 > n_samples) {
    throw NumericError("xi_u magnitude floor rejected " +
                       std::to_string(out.n_rejected) + " of " +
                       std::to_string(n_samples) +
                       " samples (> 0.1%); the xi_u != 0 invariant is broken");
  }
  if (vals_ok.size() < 2) {
    throw NumericError("too few accepted samples for a weight estimate");
  }
  out.value = num::mean_se(vals_ok);
  out.derivative = num::mean_se(prods_ok);
  return out;
}

}  // namespace

WeightEstimate delta_weight_estimate(const DiscreteScheme& scheme,
                                     const std::function<double(double)>& psi,
                                     std::size_t n_samples,
                                     std::uint64_t seed) {
  const double sig = scheme.sigma(scheme.x);
  const double sig_dx = scheme.sigma_dx(scheme.x);
  const auto weight = [&scheme, sig, sig_dx](const std::vector<double>& u,
                                             const std::vector<double>&) {
    const double xi = scheme.innov.xi(1, u[0]);
    const double xi_u = scheme.innov.xi_u(1, u[0]);
    const double xi_uu = scheme.innov.xi_uu(1, u[0]);
    if (std::fabs(xi_u) < kXiPrimeFloor) return std::nan("");
    return xi_uu * (1.0 + sig_dx * scheme.lambda * xi) /
               (scheme.lambda * sig * xi_u * xi_u) -
           sig_dx / sig;
  };
  return run_weighted(scheme, psi, n_samples, seed, weight);
}

WeightEstimate lambda_weight_estimate(const DiscreteScheme& scheme,
                                      const std::function<double(double)>& psi,
                                      std::size_t n_samples,
                                      std::uint64_t seed) {
  const auto weight = [&scheme](const std::vector<double>& u,
                                const std::vector<double>&) {
    double acc = 0.0;
    for (std::size_t k = 0; k < scheme.n_steps; ++k) {
      const int step = static_cast<int>(k) + 1;
      const double xi = scheme.innov.xi(step, u[k]);
      const double xi_u = scheme.innov.xi_u(step, u[k]);
      const double xi_uu = scheme.innov.xi_uu(step, u[k]);
      if (std::fabs(xi_u) < kXiPrimeFloor) return std::nan("");
      acc += (xi_u * xi_u - xi * xi_uu) / (xi_u * xi_u);
    }
    return -acc / scheme.lambda;
  };
  return run_weighted(scheme, psi, n_samples, seed, weight);
}

}  // namespace errcal::ibp
