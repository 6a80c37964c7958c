#include "report/commands.hpp"

#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "bs/pricer.hpp"
#include "bs/sensitivity.hpp"
#include "core/errors.hpp"
#include "core/grid.hpp"
#include "core/parallel.hpp"
#include "core/stats.hpp"
#include "algebra/algebra.hpp"
#include "ibp/ibp.hpp"
#include "levelvol/funcvol.hpp"
#include "levelvol/nested.hpp"
#include "report/config.hpp"
#include "wiener/functional.hpp"

namespace errcal::rep {

namespace {

Row make_row(std::string quantity) {
  Row row;
  row.quantity = std::move(quantity);
  return row;
}

Row value_row(std::string quantity, double t, double value) {
  Row row = make_row(std::move(quantity));
  row.t = t;
  row.value = value;
  return row;
}

// ---------------------------------------------------------------------------
// price
// ---------------------------------------------------------------------------

void cmd_price(ConfigView& view, Report& report) {
  const bs::Model model = parse_bs_model(view.child("model"), "model");
  const bs::Payoff payoff = parse_payoff(view.child("payoff"), "payoff");
  const double t = view.number_or("t", 0.0);
  const double x = view.number_or("x", model.s0);
  const int nodes = static_cast<int>(view.integer_or("nodes", 64));

  report.rows.push_back(
      value_row("value", t, bs::price(model, payoff, t, x, nodes)));
  if (t < model.horizon) {
    const bs::GreekSet g = bs::greeks(model, payoff, t, x, nodes);
    report.rows.push_back(value_row("delta", t, g.delta));
    report.rows.push_back(value_row("gamma", t, g.gamma));
    report.rows.push_back(value_row("speed", t, g.speed));
    report.rows.push_back(value_row("vega", t, g.vega));
    report.rows.push_back(value_row("rho", t, g.rho));
  }
}

// ---------------------------------------------------------------------------
// sens
// ---------------------------------------------------------------------------

bs::Source parse_source(const std::string& name, const std::string& where) {
  if (name == "B") return bs::Source::kB;
  if (name == "S0") return bs::Source::kS0;
  if (name == "sigma") return bs::Source::kSigma;
  if (name == "r") return bs::Source::kR;
  throw ConfigError("'" + where + "': unknown source '" + name +
                    "' (B, S0, sigma, r)");
}

void set_gamma_cell(Row& row, bs::Source source, double value) {
  switch (source) {
    case bs::Source::kB: row.gamma_b = value; break;
    case bs::Source::kS0: row.gamma_s0 = value; break;
    case bs::Source::kSigma: row.gamma_sigma = value; break;
    case bs::Source::kR: row.gamma_r = value; break;
  }
}

void cmd_sens(ConfigView& view, Report& report) {
  const bs::Model model = parse_bs_model(view.child("model"), "model");
  const bs::Payoff payoff = parse_payoff(view.child("payoff"), "payoff");
  const std::vector<double> t_grid = view.numbers("t_grid");
  const double b = view.number_or("b", 0.0);
  const int nodes = static_cast<int>(view.integer_or("nodes", 64));
  const std::string convention_name =
      view.string_or("bias_convention", "generator");
  bs::BiasConvention convention;
  if (convention_name == "generator") {
    convention = bs::BiasConvention::kGenerator;
  } else if (convention_name == "table") {
    convention = bs::BiasConvention::kTable;
  } else {
    throw ConfigError("'bias_convention': unknown value '" + convention_name +
                      "' (generator, table)");
  }

  std::vector<bs::Source> sources;
  if (view.has("sources")) {
    const auto& arr = view.child("sources");
    if (!arr.is_array()) {
      throw ConfigError("'sources' must be an array of source names");
    }
    for (const auto& e : arr) {
      if (!e.is_string()) {
        throw ConfigError("'sources' must be an array of source names");
      }
      sources.push_back(parse_source(e.get<std::string>(), "sources"));
    }
  } else {
    if (model.errors.b) sources.push_back(bs::Source::kB);
    if (model.errors.s0) sources.push_back(bs::Source::kS0);
    if (model.errors.sigma) sources.push_back(bs::Source::kSigma);
    if (model.errors.r) sources.push_back(bs::Source::kR);
  }

  const bool bias_auto =
      model.kernel->name() == "ou" && model.errors.b;
  const bool with_bias = view.boolean_or("with_bias", bias_auto);
  const bool hedge_auto = payoff.smoothness() == bs::Smoothness::kC2;
  const bool with_hedge = view.boolean_or("with_hedge", hedge_auto);

  for (const double t : t_grid) {
    const double spot = model.spot(t, b);
    const bs::PathState state{t, spot, b};

    Row value = make_row("V_t");
    value.t = t;
    value.value = bs::price(model, payoff, t, spot, nodes);
    for (const bs::Source source : sources) {
      set_gamma_cell(value, source,
                     bs::gamma_value(model, payoff, state, source, nodes));
    }
    std::optional<bs::BiasReport> bias;
    if (with_bias) {
      bias = bs::bias_table(model, payoff, state, convention, with_hedge,
                            nodes);
      value.bias = bias->value.bias;
    }
    report.rows.push_back(value);

    if (with_hedge) {
      Row hedge = make_row("H_t");
      hedge.t = t;
      hedge.value = bs::greeks(model, payoff, t, spot, nodes).delta;
      hedge.gamma_b = bs::gamma_hedge(model, payoff, state, nodes);
      if (bias && bias->hedge) hedge.bias = bias->hedge->bias;
      report.rows.push_back(hedge);
    }
  }
}

// ---------------------------------------------------------------------------
// levelvol
// ---------------------------------------------------------------------------

void cmd_levelvol(ConfigView& view, Report& report) {
  const lv::LocalVolModel model = parse_lv_model(view.child("model"), "model");
  const bs::Payoff payoff = parse_payoff(view.child("payoff"), "payoff");
  const double t = view.number("t");

  lv::NestedBudget budget;
  budget.n_outer = view.uint_or("paths", 200);
  budget.n_inner = view.uint_or("inner", 200);
  budget.n_steps = view.uint_or("steps", 100);
  budget.max_cost = view.number_or("max_cost", 5e9);

  const bool with_hedge = view.boolean_or("with_hedge", false);
  const std::string variant_name = view.string_or("z_variant", "verbatim");
  lv::ZVariant variant;
  if (variant_name == "verbatim") {
    variant = lv::ZVariant::kVerbatim;
  } else if (variant_name == "corrected") {
    variant = lv::ZVariant::kCorrected;
  } else {
    throw ConfigError("'z_variant': unknown value '" + variant_name +
                      "' (verbatim, corrected)");
  }

  const lv::NestedResult value =
      lv::value_and_gamma_v(model, payoff, t, budget, report.seed);
  {
    Row row = make_row("V_t");
    row.t = t;
    row.value = value.value_mean.mean;
    row.std_error = value.value_mean.se;
    report.rows.push_back(row);
  }
  {
    Row row = make_row("Gamma_B[V_t]");
    row.t = t;
    row.gamma_b = value.gamma_mean.mean;
    row.std_error = value.gamma_mean.se;
    report.rows.push_back(row);
  }
  report.rows.push_back(value_row("n_dropped", t,
                                  static_cast<double>(value.n_dropped)));
  report.rows.push_back(
      value_row("n_inner_exploded", t,
                static_cast<double>(value.n_inner_exploded)));

  if (with_hedge) {
    const lv::NestedResult hedge =
        lv::hedge_and_gamma_h(model, payoff, t, budget, report.seed, variant);
    Row hrow = make_row("H_t");
    hrow.t = t;
    hrow.value = hedge.value_mean.mean;
    hrow.std_error = hedge.value_mean.se;
    report.rows.push_back(hrow);
    Row grow = make_row("Gamma_B[H_t]");
    grow.t = t;
    grow.gamma_b = hedge.gamma_mean.mean;
    grow.std_error = hedge.gamma_mean.se;
    report.rows.push_back(grow);
  }

  if (view.has("cross_s")) {
    const double s = view.number("cross_s");
    const lv::CrossResult cross =
        lv::gamma_v_cross(model, payoff, s, t, budget, report.seed);
    Row row = make_row("Gamma_B[V_s,V_t]");
    row.t = t;
    row.value = cross.cross_mean.mean;
    row.std_error = cross.cross_mean.se;
    report.rows.push_back(row);
  }

  if (view.has("funcvol_terms")) {
    const auto terms =
        parse_poly_terms(view.child("funcvol_terms"), "funcvol_terms");
    const lv::FuncVolResult fv = lv::functional_vol_sensitivity(
        model, terms, t, budget.n_steps, budget.n_outer, report.seed);
    Row row = make_row("Gamma_coeff[X_t]");
    row.t = t;
    row.value = fv.gamma_mean.mean;
    row.std_error = fv.gamma_mean.se;
    report.rows.push_back(row);
  }
}

// ---------------------------------------------------------------------------
// ibp
// ---------------------------------------------------------------------------

/// Common-random-number central difference of E[psi(S_N)] in one scheme
/// parameter: per-sample difference quotient, so the paired spread is what
/// enters the standard error.
num::MeanSE crn_fd(const ibp::DiscreteScheme& base,
                   const std::function<double(double)>& psi,
                   std::size_t n_samples, std::uint64_t seed, bool bump_lambda,
                   double h) {
  ibp::DiscreteScheme up = base;
  ibp::DiscreteScheme down = base;
  if (bump_lambda) {
    up.lambda += h;
    down.lambda -= h;
  } else {
    up.x += h;
    down.x -= h;
  }
  up.validate();
  down.validate();
  std::vector<double> quotient(n_samples);
  parallel_for(n_samples, [&](std::size_t p) {
    const auto u = ibp::draw_uniform_row(base.n_steps, seed, p);
    const double plus = psi(ibp::scheme_path(up, u).back());
    const double minus = psi(ibp::scheme_path(down, u).back());
    quotient[p] = (plus - minus) / (2.0 * h);
  });
  return num::mean_se(quotient);
}

void cmd_ibp(ConfigView& view, Report& report) {
  ConfigView sv(view.child("scheme"), "scheme");
  ibp::DiscreteScheme scheme;
  scheme.n_steps = sv.uint_or("n_steps", 1);
  scheme.x = sv.number("x");
  scheme.lambda = sv.number("lambda");
  const ScalarFn sigma = parse_scalar_fn(sv.child("sigma"), "scheme.sigma");
  scheme.sigma = sigma.f;
  scheme.sigma_dx = sigma.d1;
  const std::string innov = sv.string_or("innovations", "gaussian");
  if (innov != "gaussian") {
    throw ConfigError("'scheme.innovations': only 'gaussian' is available");
  }
  scheme.innov = ibp::gaussian_innovations();
  sv.done();
  scheme.validate();

  const bs::Payoff psi_payoff = parse_payoff(view.child("psi"), "psi");
  const auto psi = [&psi_payoff](double s) { return psi_payoff(s); };
  const std::size_t n_samples = view.uint_or("paths", 100000);
  const double fd_scale = view.number_or("fd_step", 1e-3);
  if (!(fd_scale > 0.0) || !std::isfinite(fd_scale)) {
    throw ConfigError("'fd_step' must be positive");
  }

  const ibp::WeightEstimate delta =
      ibp::delta_weight_estimate(scheme, psi, n_samples, report.seed);
  const ibp::WeightEstimate lambda =
      ibp::lambda_weight_estimate(scheme, psi, n_samples, report.seed);

  const double h_x = fd_scale * std::max(1.0, std::fabs(scheme.x));
  const double h_l = fd_scale * scheme.lambda;
  const num::MeanSE fd_x =
      crn_fd(scheme, psi, n_samples, report.seed, false, h_x);
  const num::MeanSE fd_x_half =
      crn_fd(scheme, psi, n_samples, report.seed, false, 0.5 * h_x);
  const num::MeanSE fd_l =
      crn_fd(scheme, psi, n_samples, report.seed, true, h_l);
  const num::MeanSE fd_l_half =
      crn_fd(scheme, psi, n_samples, report.seed, true, 0.5 * h_l);

  const auto push = [&report](const char* name, const num::MeanSE& est) {
    Row row = make_row(name);
    row.value = est.mean;
    row.std_error = est.se;
    report.rows.push_back(row);
  };
  push("E[psi]", delta.value);
  push("ddx_weight", delta.derivative);
  push("ddx_fd", fd_x);
  push("ddx_fd_half", fd_x_half);
  push("ddlambda_weight", lambda.derivative);
  push("ddlambda_fd", fd_l);
  push("ddlambda_fd_half", fd_l_half);
  report.rows.push_back(
      value_row("n_rejected", 0.0,
                static_cast<double>(delta.n_rejected + lambda.n_rejected)));
}

// ---------------------------------------------------------------------------
// perturb-check
// ---------------------------------------------------------------------------

void cmd_perturb_check(ConfigView& view, Report& report) {
  const bs::Model model = parse_bs_model(view.child("model"), "model");
  if (model.kernel->name() != "ou") {
    throw CapabilityError(
        "perturb-check implements the Ornstein-Uhlenbeck resampling "
        "perturbation; kernel '" + model.kernel->name() + "' has no "
        "resampling representation here");
  }
  const std::string quantity = view.string_or("quantity", "V");
  const double t = view.number("t");
  const double theta = view.number_or("theta", 1e-3);
  const std::size_t n_paths = view.uint_or("paths", 100000);
  const std::size_t n_steps = view.uint_or("steps", 64);
  const int nodes = static_cast<int>(view.integer_or("nodes", 64));
  const bool with_bias = view.boolean_or("with_bias", true);
  if (!(theta > 0.0) || !std::isfinite(theta)) {
    throw ConfigError("'theta' must be positive");
  }

  const TimeGrid grid(model.horizon, n_steps);
  const std::size_t j = grid.index_of(t);
  const double sig = model.sigma;

  std::optional<bs::Payoff> payoff;
  if (quantity == "V" || quantity == "H") {
    payoff = parse_payoff(view.child("payoff"), "payoff");
  } else if (view.has("payoff")) {
    view.allow("payoff");  // ignored for B and S quantities
  }

  wiener::BrownianFunctional functional;
  wiener::PathClosedForm closed_gamma;
  wiener::PathClosedForm closed_bias;

  if (quantity == "B") {
    functional = [j](const std::vector<double>& b, const TimeGrid&) {
      return b[j];
    };
    closed_gamma = [t](const std::vector<double>&, const TimeGrid&) {
      return t;
    };
    closed_bias = [j](const std::vector<double>& b, const TimeGrid&) {
      return -0.5 * b[j];
    };
  } else if (quantity == "S") {
    functional = [&model, t, j](const std::vector<double>& b,
                                const TimeGrid&) {
      return model.spot(t, b[j]);
    };
    closed_gamma = [&model, t, j, sig](const std::vector<double>& b,
                                       const TimeGrid&) {
      const double s = model.spot(t, b[j]);
      return s * s * sig * sig * t;
    };
    closed_bias = [&model, t, j, sig](const std::vector<double>& b,
                                      const TimeGrid&) {
      const double s = model.spot(t, b[j]);
      return sig * s * (-0.5 * b[j]) + 0.5 * sig * sig * s * t;
    };
  } else if (quantity == "V" || quantity == "H") {
    const bs::Payoff f = *payoff;
    const bool hedge = quantity == "H";
    functional = [&model, f, t, j, hedge, nodes](const std::vector<double>& b,
                                                 const TimeGrid&) {
      const double s = model.spot(t, b[j]);
      if (hedge) return bs::greeks(model, f, t, s, nodes).delta;
      return bs::price(model, f, t, s, nodes);
    };
    closed_gamma = [&model, f, t, j, hedge, nodes](
                       const std::vector<double>& b, const TimeGrid&) {
      const bs::PathState state{t, model.spot(t, b[j]), b[j]};
      if (hedge) return bs::gamma_hedge(model, f, state, nodes);
      return bs::gamma_value(model, f, state, bs::Source::kB, nodes);
    };
    closed_bias = [&model, f, t, j, hedge, sig, nodes](
                      const std::vector<double>& b, const TimeGrid&) {
      const double s = model.spot(t, b[j]);
      const double a_b = -0.5 * b[j];
      const double gamma_s = s * s * sig * sig * t;
      const double a_s = sig * s * a_b + 0.5 * sig * sig * s * t;
      const bs::GreekSet g = bs::greeks(model, f, t, s, nodes);
      if (hedge) return g.gamma * a_s + 0.5 * g.speed * gamma_s;
      return g.delta * a_s + 0.5 * g.gamma * gamma_s;
    };
    if (hedge && f.smoothness() != bs::Smoothness::kC2) {
      throw ConfigError(
          "perturb-check on H needs a twice-differentiable payoff");
    }
  } else {
    throw ConfigError("'quantity': unknown value '" + quantity +
                      "' (B, S, V, H)");
  }

  const wiener::PerturbCheckResult result = wiener::perturb_check(
      functional, closed_gamma, with_bias ? &closed_bias : nullptr, grid,
      n_paths, theta, report.seed);

  {
    Row row = make_row("gamma_empirical");
    row.t = t;
    row.value = result.gamma.empirical;
    row.std_error = result.gamma.empirical_se;
    report.rows.push_back(row);
  }
  {
    Row row = make_row("gamma_closed");
    row.t = t;
    row.value = result.gamma.closed;
    row.std_error = result.gamma.closed_se;
    report.rows.push_back(row);
  }
  {
    Row row = make_row("gamma_diff");
    row.t = t;
    row.value = result.gamma.diff;
    row.std_error = result.gamma.diff_se;
    report.rows.push_back(row);
  }
  if (result.bias) {
    Row row = make_row("bias_slope");
    row.t = t;
    row.value = result.bias->slope;
    row.std_error = result.bias->slope_se;
    report.rows.push_back(row);
  }
}

// ---------------------------------------------------------------------------
// triangle
// ---------------------------------------------------------------------------

std::vector<double> parse_axis(ConfigView& view, const char* key) {
  const auto& j = view.child(key);
  const std::string where = view.locate(key);
  if (j.is_number()) return {j.get<double>()};
  if (j.is_array()) {
    std::vector<double> out;
    for (const auto& e : j) {
      if (!e.is_number()) {
        throw ConfigError("'" + where + "' must hold numbers");
      }
      out.push_back(e.get<double>());
    }
    if (out.empty()) throw ConfigError("'" + where + "' must be nonempty");
    return out;
  }
  if (j.is_object()) {
    ConfigView av(j, where);
    const double start = av.number("start");
    const double stop = av.number("stop");
    const auto count = static_cast<std::size_t>(av.integer("count"));
    av.done();
    if (count == 0) throw ConfigError("'" + where + ".count' must be >= 1");
    std::vector<double> out(count);
    for (std::size_t i = 0; i < count; ++i) {
      out[i] = count == 1 ? start
                          : start + (stop - start) * static_cast<double>(i) /
                                        static_cast<double>(count - 1);
    }
    return out;
  }
  throw ConfigError("'" + where +
                    "' must be a number, an array, or {start, stop, count}");
}

void cmd_triangle(ConfigView& view, Report& report) {
  const auto l1s = parse_axis(view, "l1");
  const auto l2s = parse_axis(view, "l2");
  const auto t1s = parse_axis(view, "theta1");
  const auto t2s = parse_axis(view, "theta2");
  const std::size_t max_rows = view.uint_or("max_rows", 10000);
  const std::size_t points = l1s.size() * l2s.size() * t1s.size() * t2s.size();
  if (points * 4 > max_rows) {
    throw ConfigError("triangle grid would emit " + std::to_string(points * 4) +
                      " rows, over the max_rows limit of " +
                      std::to_string(max_rows));
  }

  const algebra::SmoothMap map = algebra::triangle_map();
  const algebra::GammaField field = algebra::triangle_field();

  for (const double l1 : l1s) {
    for (const double l2 : l2s) {
      for (const double t1 : t1s) {
        for (const double t2 : t2s) {
          const algebra::TriangleGamma closed =
              algebra::triangle_errors(l1, l2, t1, t2);
          Eigen::VectorXd x(4);
          x << l1, l2, t1, t2;
          const algebra::ErrorVector in{x, field.at(x), std::nullopt};
          const algebra::ErrorVector out = algebra::propagate_gamma(map, in);
          const double scale = std::max(
              {std::fabs(closed.xx), std::fabs(closed.yy),
               std::fabs(closed.xy), 1e-30});
          const double dev =
              std::max({std::fabs(out.gamma(0, 0) - closed.xx),
                        std::fabs(out.gamma(1, 1) - closed.yy),
                        std::fabs(out.gamma(0, 1) - closed.xy)}) /
              scale;
          const std::string suffix = "(l1=" + format_double(l1) +
                                     ",l2=" + format_double(l2) +
                                     ",t1=" + format_double(t1) +
                                     ",t2=" + format_double(t2) + ")";
          Row xx = make_row("Gamma[X_B]" + suffix);
          xx.value = closed.xx;
          report.rows.push_back(xx);
          Row yy = make_row("Gamma[Y_B]" + suffix);
          yy.value = closed.yy;
          report.rows.push_back(yy);
          Row xy = make_row("Gamma[X_B,Y_B]" + suffix);
          xy.value = closed.xy;
          report.rows.push_back(xy);
          Row dr = make_row("max_rel_dev" + suffix);
          dr.value = dev;
          report.rows.push_back(dr);
        }
      }
    }
  }
}

}  // namespace

Report run_command(const std::string& command, const nlohmann::json& config) {
  if (!config.is_object()) {
    throw ConfigError("config must be a JSON object");
  }
  Report report;
  report.command = command;
  report.config_hash = config_hash_hex(config);

  ConfigView view(config, "");
  report.seed = view.uint_or("seed", 12345);
  report.default_format = view.string_or("format", "csv");
  report.out_path = view.string_or("out", "");
  if (report.default_format != "csv" && report.default_format != "json") {
    throw ConfigError("'format' must be 'csv' or 'json'");
  }

  if (command == "price") {
    cmd_price(view, report);
  } else if (command == "sens") {
    cmd_sens(view, report);
  } else if (command == "levelvol") {
    cmd_levelvol(view, report);
  } else if (command == "ibp") {
    cmd_ibp(view, report);
  } else if (command == "perturb-check") {
    cmd_perturb_check(view, report);
  } else if (command == "triangle") {
    cmd_triangle(view, report);
  } else {
    throw ConfigError("unknown command '" + command +
                      "' (price, sens, levelvol, ibp, perturb-check, "
                      "triangle)");
  }
  view.done();
  return report;
}

}  // namespace errcal::rep
