#include "bs/sensitivity.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <string>

#include "algebra/algebra.hpp"
#include "core/errors.hpp"
#include "core/parallel.hpp"
#include "core/philox.hpp"
#include "core/quad.hpp"

namespace errcal::bs {
namespace {

void check_state(const Model& model, const PathState& state) {
  model.validate();
  if (!std::isfinite(state.t) || state.t < 0.0 || state.t >= model.horizon) {
    throw ConfigError("path state: t must lie in [0, horizon)");
  }
  if (!(state.s > 0.0) || !std::isfinite(state.s)) {
    throw ConfigError("path state: spot must be positive and finite");
  }
  if (!std::isfinite(state.b)) {
    throw ConfigError("path state: Brownian value must be finite");
  }
}

void require_source(const Model& model, Source source) {
  const bool enabled = source == Source::kB       ? model.errors.b
                       : source == Source::kS0    ? model.errors.s0
                       : source == Source::kSigma ? model.errors.sigma
                                                  : model.errors.r;
  if (!enabled) {
    const char* name = source == Source::kB       ? "B"
                       : source == Source::kS0    ? "S0"
                       : source == Source::kSigma ? "sigma"
                                                  : "r";
    throw CapabilityError(std::string("error source '") + name +
                          "' is disabled in the model");
  }
}

void require_c2(const Payoff& payoff, const char* what) {
  if (payoff.smoothness() != Smoothness::kC2) {
    throw ConfigError(std::string(what) + " requires a C2 payoff; '" +
                      payoff.label() +
                      "' is not (use the softplus-smoothed call)");
  }
}

}  // namespace

double gamma_value(const Model& model, const Payoff& payoff,
                   const PathState& state, Source source, int nodes) {
  check_state(model, state);
  require_source(model, source);
  const GreekSet g = greeks(model, payoff, state.t, state.s, nodes);
  const double s2 = state.s * state.s;
  switch (source) {
    case Source::kB: {
      const double kappa = model.kernel->gamma_indicator(state.t);
      return g.delta * g.delta * s2 * model.sigma * model.sigma * kappa;
    }
    case Source::kS0:
      return g.delta * g.delta * s2;
    case Source::kSigma: {
      const double d =
          g.vega + state.s * (state.b - model.sigma * state.t) * g.delta;
      return d * d * model.sigma * model.sigma;
    }
    case Source::kR: {
      const double d = state.t * state.s * g.delta + g.rho;
      return d * d * model.r * model.r;
    }
  }
  throw ConfigError("unknown error source");
}

double gamma_value_cross_b(const Model& model, const Payoff& payoff,
                           const PathState& first, const PathState& second,
                           int nodes) {
  check_state(model, first);
  check_state(model, second);
  require_source(model, Source::kB);
  const double kappa = model.kernel->gamma_indicator_cross(first.t, second.t);
  const GreekSet ga = greeks(model, payoff, first.t, first.s, nodes);
  const GreekSet gb = greeks(model, payoff, second.t, second.s, nodes);
  return ga.delta * gb.delta * first.s * second.s * model.sigma * model.sigma *
         kappa;
}

double gamma_hedge(const Model& model, const Payoff& payoff,
                   const PathState& state, int nodes) {
  check_state(model, state);
  require_source(model, Source::kB);
  require_c2(payoff, "hedge sensitivity");
  const GreekSet g = greeks(model, payoff, state.t, state.s, nodes);
  const double kappa = model.kernel->gamma_indicator(state.t);
  return g.gamma * g.gamma * state.s * state.s * model.sigma * model.sigma *
         kappa;
}

double gamma_hedge_cross_b(const Model& model, const Payoff& payoff,
                           const PathState& first, const PathState& second,
                           int nodes) {
  check_state(model, first);
  check_state(model, second);
  require_source(model, Source::kB);
  require_c2(payoff, "hedge sensitivity");
  const double kappa = model.kernel->gamma_indicator_cross(first.t, second.t);
  const GreekSet ga = greeks(model, payoff, first.t, first.s, nodes);
  const GreekSet gb = greeks(model, payoff, second.t, second.s, nodes);
  return ga.gamma * gb.gamma * first.s * second.s * model.sigma * model.sigma *
         kappa;
}

LimitReport limit_checks(const Model& model, const Payoff& payoff,
                         const std::vector<double>& t_sequence,
                         std::size_t n_paths, std::uint64_t seed, int nodes) {
  model.validate();
  if (t_sequence.empty()) {
    throw ConfigError("limit_checks: empty time sequence");
  }
  for (std::size_t i = 0; i < t_sequence.size(); ++i) {
    const double t = t_sequence[i];
    if (!std::isfinite(t) || t <= 0.0 || t >= model.horizon) {
      throw ConfigError("limit_checks: times must lie in (0, horizon)");
    }
    if (i > 0 && !(t > t_sequence[i - 1])) {
      throw ConfigError("limit_checks: times must be strictly increasing");
    }
  }
  if (n_paths < 2) {
    throw ConfigError("limit_checks: need at least 2 paths");
  }
  const bool with_hedge = payoff.smoothness() == Smoothness::kC2;
  const std::size_t levels = t_sequence.size();
  const std::size_t pairs = (n_paths + 1) / 2;

  std::vector<double> kappa(levels);
  for (std::size_t k = 0; k < levels; ++k) {
    kappa[k] = model.kernel->gamma_indicator(t_sequence[k]);
  }
  const double kappa_T = model.kernel->gamma_indicator(model.horizon);
  const double sig2 = model.sigma * model.sigma;

  // Increment step widths over the merged grid t_1 < ... < t_K < horizon.
  std::vector<double> dt(levels + 1);
  double prev = 0.0;
  for (std::size_t k = 0; k < levels; ++k) {
    dt[k] = t_sequence[k] - prev;
    prev = t_sequence[k];
  }
  dt[levels] = model.horizon - prev;

  // Warm the quadrature caches before the parallel region.
  (void)greeks(model, payoff, t_sequence[0], model.s0, nodes);

  // Per-pair accumulators (sum over the antithetic pair), reduced after.
  std::vector<double> acc_gv(pairs * levels), acc_gh(pairs * levels);
  std::vector<double> acc_abs_v(pairs * levels), acc_abs_h(pairs * levels);
  std::vector<double> acc_cv(pairs * levels), acc_ch(pairs * levels);
  std::vector<double> acc_lim_v(pairs), acc_lim_h(pairs);

  // Conditionally smoothed limit object: E[f'(S_T)^2 S_T^2 | S_t] (and the
  // f'' analogue) by quadrature over the remaining lognormal mass.  Same
  // expectation as the sampled terminal value by the tower property, but the
  // per-path difference to Gamma[V_t] is O(tau) instead of O(sqrt(tau)), so
  // the aggregate gap resolves well below the Monte Carlo noise of the
  // terminal-sampled version.
  const double rr = model.r;
  const double sg = model.sigma;
  const double horizon = model.horizon;
  const auto cond_limit = [&payoff, rr, sg, horizon, nodes](
                              double t, double st, bool second) {
    const double tau = horizon - t;
    const double sq = sg * std::sqrt(tau);
    const double drift = (rr - 0.5 * sg * sg) * tau;
    return num::expect_normal(
        [&payoff, st, sq, drift, second](double z) {
          const double s_T = st * std::exp(sq * z + drift);
          const double d = second ? payoff.d2(s_T) : payoff.d1(s_T);
          return d * d * s_T * s_T;
        },
        nodes);
  };
  (void)num::gauss_hermite(nodes);

  parallel_for(pairs, [&](std::size_t p) {
    std::vector<double> z(levels + 1);
    for (std::size_t j = 0; j <= levels; ++j) {
      z[j] = rng::gaussian(seed, rng::Stream::kPathIncrement, p,
                            static_cast<std::uint32_t>(j), 0);
    }
    for (int sign = 0; sign < 2; ++sign) {
      const double sgn = sign == 0 ? 1.0 : -1.0;
      double b = 0.0;
      std::vector<double> bt(levels);
      for (std::size_t k = 0; k < levels; ++k) {
        b += sgn * std::sqrt(dt[k]) * z[k];
        bt[k] = b;
      }
      const double b_T = b + sgn * std::sqrt(dt[levels]) * z[levels];
      const double s_T = model.spot(model.horizon, b_T);
      const double fp = payoff.d1(s_T);
      const double lim_v = fp * fp * s_T * s_T * sig2 * kappa_T;
      acc_lim_v[p] += lim_v;
      double lim_h = 0.0;
      if (with_hedge) {
        const double fpp = payoff.d2(s_T);
        lim_h = fpp * fpp * s_T * s_T * sig2 * kappa_T;
        acc_lim_h[p] += lim_h;
      }
      for (std::size_t k = 0; k < levels; ++k) {
        const double st = model.spot(t_sequence[k], bt[k]);
        const GreekSet g = greeks(model, payoff, t_sequence[k], st, nodes);
        const double gv = g.delta * g.delta * st * st * sig2 * kappa[k];
        acc_gv[p * levels + k] += gv;
        acc_abs_v[p * levels + k] += std::abs(gv - lim_v);
        acc_cv[p * levels + k] +=
            cond_limit(t_sequence[k], st, false) * sig2 * kappa_T;
        if (with_hedge) {
          const double ghv = g.gamma * g.gamma * st * st * sig2 * kappa[k];
          acc_gh[p * levels + k] += ghv;
          acc_abs_h[p * levels + k] += std::abs(ghv - lim_h);
          acc_ch[p * levels + k] +=
              cond_limit(t_sequence[k], st, true) * sig2 * kappa_T;
        }
      }
    }
  });

  const double total = static_cast<double>(2 * pairs);
  double mean_lim_v = 0.0, mean_lim_h = 0.0;
  for (std::size_t p = 0; p < pairs; ++p) {
    mean_lim_v += acc_lim_v[p];
    mean_lim_h += acc_lim_h[p];
  }
  mean_lim_v /= total;
  mean_lim_h /= total;
  if (!(mean_lim_v > 0.0)) {
    // Degenerate payoffs (constant): every gap is exactly zero.
    mean_lim_v = 0.0;
  }

  LimitReport report;
  report.n_paths = 2 * pairs;
  report.mean_limit_value = mean_lim_v;
  report.mean_limit_hedge = mean_lim_h;
  for (std::size_t k = 0; k < levels; ++k) {
    double mg = 0.0, ma = 0.0, mc = 0.0, mgh = 0.0, mah = 0.0, mch = 0.0;
    for (std::size_t p = 0; p < pairs; ++p) {
      mg += acc_gv[p * levels + k];
      ma += acc_abs_v[p * levels + k];
      mc += acc_cv[p * levels + k];
      mgh += acc_gh[p * levels + k];
      mah += acc_abs_h[p * levels + k];
      mch += acc_ch[p * levels + k];
    }
    mg /= total;
    ma /= total;
    mc /= total;
    mgh /= total;
    mah /= total;
    mch /= total;
    const double ratio = kappa[k] / kappa_T;
    LimitRow row;
    row.t = t_sequence[k];
    if (mc > 0.0) {
      row.literal_gap = std::abs(mg - mc) / mc;
      row.sync_gap = std::abs(mg - ratio * mc) / (ratio * mc);
      row.l1_gap = ma / mc;
    }
    report.value.push_back(row);
    if (with_hedge) {
      LimitRow hrow;
      hrow.t = t_sequence[k];
      if (mch > 0.0) {
        hrow.literal_gap = std::abs(mgh - mch) / mch;
        hrow.sync_gap = std::abs(mgh - ratio * mch) / (ratio * mch);
        hrow.l1_gap = mah / mch;
      }
      report.hedge.push_back(hrow);
    }
  }
  return report;
}

NeutralPortfolio neutral_portfolio(const Model& model,
                                   const std::vector<Payoff>& payoffs,
                                   int nodes) {
  model.validate();
  if (payoffs.size() < 3) {
    throw ConfigError("neutral portfolio requires at least 3 payoffs");
  }
  const auto n = static_cast<Eigen::Index>(payoffs.size());
  NeutralPortfolio out;
  Eigen::MatrixXd constraints(2, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const GreekSet g = greeks(model, payoffs[static_cast<std::size_t>(i)], 0.0,
                              model.s0, nodes);
    constraints(0, i) = g.gamma;
    constraints(1, i) = g.rho;
    out.gammas.push_back(g.gamma);
    out.vegas.push_back(g.vega);
    out.rhos.push_back(g.rho);
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(constraints, Eigen::ComputeFullV);
  const Eigen::VectorXd& sv = svd.singularValues();
  const double tol = sv.size() > 0 ? sv(0) * 1e-12 : 0.0;
  int rank = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i) {
    if (sv(i) > tol && sv(i) > 0.0) ++rank;
  }
  out.rank = rank;
  if (rank >= n) {
    throw NumericError("neutral portfolio: constraint rank " +
                       std::to_string(rank) + " leaves no null space for " +
                       std::to_string(n) + " payoffs");
  }
  const Eigen::MatrixXd& v = svd.matrixV();
  for (Eigen::Index c = rank; c < n; ++c) {
    Eigen::VectorXd w = v.col(c);
    // Deterministic normalization: largest-magnitude entry becomes +1.
    Eigen::Index imax = 0;
    for (Eigen::Index i = 1; i < n; ++i) {
      if (std::abs(w(i)) > std::abs(w(imax))) imax = i;
    }
    w /= w(imax);
    out.basis.emplace_back(w.data(), w.data() + w.size());
  }

  const std::vector<double>& w0 = out.basis.front();
  double vega_dot = 0.0, rho_dot = 0.0, vega_abs = 0.0, rho_abs = 0.0;
  for (std::size_t i = 0; i < w0.size(); ++i) {
    vega_dot += w0[i] * out.vegas[i];
    rho_dot += w0[i] * out.rhos[i];
    vega_abs += std::abs(w0[i] * out.vegas[i]);
    rho_abs += std::abs(w0[i] * out.rhos[i]);
  }
  const double sig2 = model.sigma * model.sigma;
  const double r2 = model.r * model.r;
  out.gamma_sigma_residual = vega_dot * vega_dot * sig2;
  out.gamma_r_residual = rho_dot * rho_dot * r2;
  out.sigma_scale_sq = vega_abs * vega_abs * sig2;
  out.r_scale_sq = rho_abs * rho_abs * r2;
  return out;
}

BiasReport bias_table(const Model& model, const Payoff& payoff,
                      const PathState& state, BiasConvention convention,
                      bool require_hedge, int nodes) {
  check_state(model, state);
  require_source(model, Source::kB);
  if (model.kernel->name() != "ou") {
    throw CapabilityError(
        "bias table requires the Ornstein-Uhlenbeck error structure; kernel "
        "is '" +
        model.kernel->name() + "'");
  }
  const bool with_hedge = payoff.smoothness() == Smoothness::kC2;
  if (require_hedge && !with_hedge) {
    require_c2(payoff, "hedge bias row");
  }

  BiasReport rep;
  rep.nu = convention == BiasConvention::kGenerator ? 1.0 : 2.0;
  const double t = state.t;
  const double s = state.s;
  const double sigma = model.sigma;
  const double gamma_b = t;
  const double a_b = -0.5 * rep.nu * state.b;
  rep.b = {gamma_b, a_b, a_b};

  const double gamma_s = s * s * sigma * sigma * t;
  const double a_s = sigma * s * a_b + 0.5 * sigma * sigma * s * gamma_b;
  const GreekSet g = greeks(model, payoff, t, s, nodes);
  const double a_v = g.delta * a_s + 0.5 * g.gamma * gamma_s;
  const double gamma_v = g.delta * g.delta * gamma_s;

  // Independent route: the generic second-order transport through the maps
  // b -> S_t -> V_t (and b -> S_t -> H_t), started from (b, t, A[B_t]).
  const double drift = (model.r - 0.5 * sigma * sigma) * t;
  algebra::Map1D exp_map{
      [&](double b) { return model.s0 * std::exp(sigma * b + drift); },
      [&](double b) { return sigma * model.s0 * std::exp(sigma * b + drift); },
      [&](double b) {
        return sigma * sigma * model.s0 * std::exp(sigma * b + drift);
      }};
  algebra::Map1D value_map{
      [&](double x) { return price(model, payoff, t, x, nodes); },
      [&](double x) { return greeks(model, payoff, t, x, nodes).delta; },
      [&](double x) { return greeks(model, payoff, t, x, nodes).gamma; }};
  const algebra::TransportState init{state.b, gamma_b, a_b};
  const auto chain_v = algebra::transport(init, {exp_map, value_map});
  rep.spot = {gamma_s, a_s, chain_v[1].bias};
  rep.value = {gamma_v, a_v, chain_v[2].bias};

  if (with_hedge) {
    const double a_h = g.gamma * a_s + 0.5 * g.speed * gamma_s;
    const double gamma_h = g.gamma * g.gamma * gamma_s;
    algebra::Map1D hedge_map{
        [&](double x) { return greeks(model, payoff, t, x, nodes).delta; },
        [&](double x) { return greeks(model, payoff, t, x, nodes).gamma; },
        [&](double x) { return greeks(model, payoff, t, x, nodes).speed; }};
    const auto chain_h = algebra::transport(init, {exp_map, hedge_map});
    rep.hedge = BiasRow{gamma_h, a_h, chain_h[2].bias};
  }
  return rep;
}

}  // namespace errcal::bs
