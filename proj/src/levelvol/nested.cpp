#include "levelvol/nested.hpp"

#include <cmath>
#include <string>

#include "core/grid.hpp"
#include "core/parallel.hpp"
#include "core/philox.hpp"
#include "levelvol/simulate.hpp"

namespace errcal::lv {

namespace {

/// Discount e^{-int_{t_j}^{T} r} as the left-point sum on the scheme grid.
double discount_from(const LocalVolModel& model, const TimeGrid& grid,
                     std::size_t j) {
  double acc = 0.0;
  for (std::size_t k = j; k < grid.steps(); ++k) {
    acc += model.rate(grid.time(k)) * grid.dt(k);
  }
  return std::exp(-acc);
}

struct OuterState {
  double x = 0.0;
  double m = 1.0;
  double i_int = 0.0;
  bool exploded = false;
};

/// Outer path p up to node j, on the global increment stream so the first j
/// steps agree with a plain PathBundle simulation of the same seed.
OuterState run_outer(const LocalVolModel& model, const TimeGrid& grid,
                     std::size_t j, std::uint64_t seed, std::size_t p) {
  if (j == 0) return {model.x0, 1.0, 0.0, false};
  std::vector<double> db(j);
  for (std::size_t k = 0; k < j; ++k) {
    db[k] = std::sqrt(grid.dt(k)) *
            rng::gaussian(seed, rng::Stream::kPathIncrement, p,
                          static_cast<std::uint32_t>(k));
  }
  const TimeGrid sub(grid.time(j), j);
  const AuxPath aux = simulate_aux_path(model, sub, db);
  return {aux.x[j], aux.m[j], aux.i_int[j], aux.exploded};
}

struct InnerAccum {
  double sum_value = 0.0;
  double sum_delta = 0.0;
  double sum_delta_a = 0.0;
  double sum_delta_b = 0.0;
  double sum_brk_verb_a = 0.0;
  double sum_brk_verb_b = 0.0;
  double sum_brk_corr_a = 0.0;
  double sum_brk_corr_b = 0.0;
  std::size_t n_exploded = 0;
};

/// Inner ensemble restarted at (t_j, x): evolves X, the relative first
/// variation M_{t,.}, and the two Z accumulators, then collects the
/// conditional-expectation statistics.  Draws come from
/// (seed, kInnerPath, index_base | q, global step), which is what makes the
/// ensembles common-random-number across restart states.
InnerAccum run_inner(const LocalVolModel& model, const TimeGrid& grid,
                     const bs::Payoff& payoff, std::size_t j, double x0_inner,
                     double m_t, std::size_t n_inner, std::uint64_t seed,
                     std::uint64_t index_base, bool want_brackets) {
  InnerAccum acc;
  const std::size_t n = grid.steps();
  const std::size_t n_a = n_inner / 2;
  for (std::size_t q = 0; q < n_inner; ++q) {
    double x = x0_inner;
    double logm = 0.0;
    double z_verb = 0.0;
    double z_corr = 0.0;
    bool exploded = false;
    for (std::size_t k = j; k < n; ++k) {
      const double t_k = grid.time(k);
      const double dt = grid.dt(k);
      const double db = std::sqrt(dt) * rng::gaussian(seed,
                                                      rng::Stream::kInnerPath,
                                                      index_base | q,
                                                      static_cast<std::uint32_t>(k));
      const double s = model.sigma.value(t_k, x);
      const double kf = model.k_factor(t_k, x);
      const double lf = model.l_factor(t_k, x);
      const double r = model.rate(t_k);
      const double m_rel = std::exp(logm);

      const double x_next = x + x * (r * dt + s * db);
      const double logm_next = logm + kf * db + (r - 0.5 * kf * kf) * dt;
      if (!(x_next > 0.0) || !std::isfinite(x_next) ||
          std::fabs(std::log(x_next / model.x0)) > kLogExcursionCap ||
          !std::isfinite(logm_next)) {
        exploded = true;
        break;
      }
      z_verb += lf * db - kf * lf * (m_t * m_rel) * dt;
      z_corr += lf * m_rel * (db - kf * dt);
      x = x_next;
      logm = logm_next;
    }
    if (exploded) ++acc.n_exploded;

    const double m_rel_t = std::exp(logm);
    const double value = payoff(x);
    const double delta = payoff.d1(x) * m_rel_t;
    acc.sum_value += value;
    acc.sum_delta += delta;
    if (q < n_a) {
      acc.sum_delta_a += delta;
    } else {
      acc.sum_delta_b += delta;
    }
    if (want_brackets) {
      const double d2 = payoff.d2(x);
      const double d1 = payoff.d1(x);
      const double brk_verb =
          m_rel_t * (d2 * m_t * m_rel_t + d1 * z_verb);
      const double brk_corr = d2 * m_rel_t * m_rel_t + d1 * m_rel_t * z_corr;
      if (q < n_a) {
        acc.sum_brk_verb_a += brk_verb;
        acc.sum_brk_corr_a += brk_corr;
      } else {
        acc.sum_brk_verb_b += brk_verb;
        acc.sum_brk_corr_b += brk_corr;
      }
    }
  }
  return acc;
}

void check_sizes(const NestedBudget& budget) {
  if (budget.n_outer == 0 || budget.n_inner < 2) {
    throw ConfigError("nested budget needs n_outer >= 1 and n_inner >= 2");
  }
  if (budget.n_outer >= (1ull << 32) || budget.n_inner >= (1ull << 31)) {
    throw ConfigError("nested budget exceeds the substream address space");
  }
}

struct PerPath {
  double value = 0.0;
  double gamma = 0.0;
  bool ok = false;
  std::size_t inner_exploded = 0;
};

NestedResult collect(const std::vector<PerPath>& rows,
                     const std::string& what) {
  NestedResult out;
  for (const auto& row : rows) {
    if (!row.ok) {
      ++out.n_dropped;
      continue;
    }
    out.value.push_back(row.value);
    out.gamma.push_back(row.gamma);
    out.n_inner_exploded += row.inner_exploded;
  }
  if (out.value.empty()) {
    throw NumericError("all " + std::to_string(rows.size()) +
                       " outer paths exploded while estimating " + what);
  }
  out.value_mean = num::mean_se(out.value);
  out.gamma_mean = num::mean_se(out.gamma);
  return out;
}

}  // namespace

double NestedBudget::cost(std::size_t n_ensembles) const {
  const double steps = static_cast<double>(n_steps);
  const double outer = static_cast<double>(n_outer);
  const double inner = static_cast<double>(n_inner);
  return outer * steps * (1.0 + static_cast<double>(n_ensembles) * inner);
}

void NestedBudget::check(std::size_t n_ensembles) const {
  if (n_steps == 0) throw ConfigError("nested budget needs n_steps >= 1");
  check_sizes(*this);
  if (!(max_cost > 0.0)) throw ConfigError("nested budget needs max_cost > 0");
  const double c = cost(n_ensembles);
  if (c > max_cost) {
    throw ConfigError("nested run refused: estimated cost " +
                      std::to_string(c) + " scheme steps exceeds max_cost " +
                      std::to_string(max_cost) +
                      "; lower n_outer, n_inner, or n_steps");
  }
}

NestedResult value_and_gamma_v(const LocalVolModel& model,
                               const bs::Payoff& payoff, double t,
                               const NestedBudget& budget,
                               std::uint64_t seed) {
  model.validate();
  budget.check(1);
  const TimeGrid grid(model.horizon, budget.n_steps);
  const std::size_t j = grid.index_of(t);
  const double disc = discount_from(model, grid, j);
  const std::size_t n_a = budget.n_inner / 2;
  const std::size_t n_b = budget.n_inner - n_a;

  std::vector<PerPath> rows(budget.n_outer);
  parallel_for(budget.n_outer, [&](std::size_t p) {
    const OuterState outer = run_outer(model, grid, j, seed, p);
    if (outer.exploded) return;
    const InnerAccum acc =
        run_inner(model, grid, payoff, j, outer.x, outer.m, budget.n_inner,
                  seed, static_cast<std::uint64_t>(p) << 32, false);
    const double mean_a = acc.sum_delta_a / static_cast<double>(n_a);
    const double mean_b = acc.sum_delta_b / static_cast<double>(n_b);
    PerPath& row = rows[p];
    row.value = disc * acc.sum_value / static_cast<double>(budget.n_inner);
    row.gamma = disc * disc * outer.m * outer.m * (mean_a * mean_b) *
                outer.i_int;
    row.inner_exploded = acc.n_exploded;
    row.ok = true;
  });
  return collect(rows, "V_t and Gamma[V_t]");
}

NestedResult hedge_and_gamma_h(const LocalVolModel& model,
                               const bs::Payoff& payoff, double t,
                               const NestedBudget& budget, std::uint64_t seed,
                               ZVariant variant) {
  if (payoff.smoothness() != bs::Smoothness::kC2) {
    throw ConfigError(
        "Gamma[H_t] needs a twice-differentiable payoff; smooth the kink "
        "first (for calls, use the softplus payoff)");
  }
  model.validate();
  budget.check(1);
  const TimeGrid grid(model.horizon, budget.n_steps);
  const std::size_t j = grid.index_of(t);
  const double disc = discount_from(model, grid, j);
  const std::size_t n_a = budget.n_inner / 2;
  const std::size_t n_b = budget.n_inner - n_a;

  std::vector<PerPath> rows(budget.n_outer);
  parallel_for(budget.n_outer, [&](std::size_t p) {
    const OuterState outer = run_outer(model, grid, j, seed, p);
    if (outer.exploded) return;
    const InnerAccum acc =
        run_inner(model, grid, payoff, j, outer.x, outer.m, budget.n_inner,
                  seed, static_cast<std::uint64_t>(p) << 32, true);
    double brk_a = 0.0;
    double brk_b = 0.0;
    double m_scale = 1.0;
    if (variant == ZVariant::kVerbatim) {
      brk_a = acc.sum_brk_verb_a / static_cast<double>(n_a);
      brk_b = acc.sum_brk_verb_b / static_cast<double>(n_b);
    } else {
      brk_a = acc.sum_brk_corr_a / static_cast<double>(n_a);
      brk_b = acc.sum_brk_corr_b / static_cast<double>(n_b);
      m_scale = outer.m * outer.m;
    }
    PerPath& row = rows[p];
    row.value = disc * acc.sum_delta / static_cast<double>(budget.n_inner);
    row.gamma = disc * disc * (brk_a * brk_b) * m_scale * outer.i_int;
    row.inner_exploded = acc.n_exploded;
    row.ok = true;
  });
  return collect(rows, "H_t and Gamma[H_t]");
}

CrossResult gamma_v_cross(const LocalVolModel& model, const bs::Payoff& payoff,
                          double s, double t, const NestedBudget& budget,
                          std::uint64_t seed) {
  model.validate();
  budget.check(2);
  const TimeGrid grid(model.horizon, budget.n_steps);
  const std::size_t j_s = grid.index_of(s);
  const std::size_t j_t = grid.index_of(t);
  if (j_s > j_t) {
    throw ConfigError("gamma_v_cross needs s <= t");
  }
  const double disc_s = discount_from(model, grid, j_s);
  const double disc_t = discount_from(model, grid, j_t);
  const std::size_t n_a = budget.n_inner / 2;
  const std::size_t n_b = budget.n_inner - n_a;

  struct CrossRow {
    double ce_s = 0.0, ce_t = 0.0, i_s = 0.0, i_t = 0.0;
    double gamma_s = 0.0, gamma_t = 0.0, cross = 0.0;
    bool ok = false;
    std::size_t inner_exploded = 0;
  };
  std::vector<CrossRow> rows(budget.n_outer);
  // The two restart ensembles of one outer path live in disjoint substreams:
  // bit 31 of the inner index tags the s-ensemble.
  constexpr std::uint64_t kSFlag = 1ull << 31;

  parallel_for(budget.n_outer, [&](std::size_t p) {
    const OuterState at_s = run_outer(model, grid, j_s, seed, p);
    const OuterState at_t = run_outer(model, grid, j_t, seed, p);
    if (at_s.exploded || at_t.exploded) return;
    const std::uint64_t base = static_cast<std::uint64_t>(p) << 32;
    const InnerAccum acc_s = run_inner(model, grid, payoff, j_s, at_s.x,
                                       at_s.m, budget.n_inner, seed,
                                       base | kSFlag, false);
    const InnerAccum acc_t = run_inner(model, grid, payoff, j_t, at_t.x,
                                       at_t.m, budget.n_inner, seed, base,
                                       false);
    CrossRow& row = rows[p];
    const double inner_n = static_cast<double>(budget.n_inner);
    row.ce_s = at_s.m * acc_s.sum_delta / inner_n;
    row.ce_t = at_t.m * acc_t.sum_delta / inner_n;
    row.i_s = at_s.i_int;
    row.i_t = at_t.i_int;
    row.cross = disc_s * disc_t * row.ce_s * row.ce_t * at_s.i_int;
    const double sa = at_s.m * acc_s.sum_delta_a / static_cast<double>(n_a);
    const double sb = at_s.m * acc_s.sum_delta_b / static_cast<double>(n_b);
    const double ta = at_t.m * acc_t.sum_delta_a / static_cast<double>(n_a);
    const double tb = at_t.m * acc_t.sum_delta_b / static_cast<double>(n_b);
    row.gamma_s = disc_s * disc_s * (sa * sb) * at_s.i_int;
    row.gamma_t = disc_t * disc_t * (ta * tb) * at_t.i_int;
    row.inner_exploded = acc_s.n_exploded + acc_t.n_exploded;
    row.ok = true;
  });

  CrossResult out;
  out.disc_s = disc_s;
  out.disc_t = disc_t;
  for (const auto& row : rows) {
    if (!row.ok) {
      ++out.n_dropped;
      continue;
    }
    out.ce_s.push_back(row.ce_s);
    out.ce_t.push_back(row.ce_t);
    out.i_s.push_back(row.i_s);
    out.i_t.push_back(row.i_t);
    out.gamma_s.push_back(row.gamma_s);
    out.gamma_t.push_back(row.gamma_t);
    out.cross.push_back(row.cross);
    out.n_inner_exploded += row.inner_exploded;
  }
  if (out.cross.empty()) {
    throw NumericError("all outer paths exploded while estimating "
                       "Gamma[V_s, V_t]");
  }
  out.gamma_s_mean = num::mean_se(out.gamma_s);
  out.gamma_t_mean = num::mean_se(out.gamma_t);
  out.cross_mean = num::mean_se(out.cross);
  return out;
}

InnerProbe inner_probe(const LocalVolModel& model, const bs::Payoff& payoff,
                       double t, double x, double m_t, std::size_t n_inner,
                       std::size_t n_steps, std::uint64_t seed,
                       std::uint64_t outer_index) {
  model.validate();
  if (n_inner < 2) throw ConfigError("inner_probe needs n_inner >= 2");
  if (!(x > 0.0) || !std::isfinite(x) || !(m_t > 0.0) || !std::isfinite(m_t)) {
    throw ConfigError("inner_probe needs x > 0 and m_t > 0");
  }
  const TimeGrid grid(model.horizon, n_steps);
  const std::size_t j = grid.index_of(t);
  const bool want_brackets = payoff.smoothness() == bs::Smoothness::kC2;
  const InnerAccum acc = run_inner(model, grid, payoff, j, x, m_t, n_inner,
                                   seed, outer_index << 32, want_brackets);
  const double inner_n = static_cast<double>(n_inner);
  InnerProbe probe;
  probe.ce_value = acc.sum_value / inner_n;
  probe.ce_delta = acc.sum_delta / inner_n;
  if (want_brackets) {
    probe.ce_bracket_verbatim =
        (acc.sum_brk_verb_a + acc.sum_brk_verb_b) / inner_n;
    probe.ce_bracket_corrected =
        (acc.sum_brk_corr_a + acc.sum_brk_corr_b) / inner_n;
  } else {
    probe.ce_bracket_verbatim = std::nan("");
    probe.ce_bracket_corrected = std::nan("");
  }
  return probe;
}

}  // namespace errcal::lv
