#include "report/config.hpp"

#include <algorithm>
#include <cmath>

#include "core/errors.hpp"

namespace errcal::rep {

namespace {

std::string join_path(const std::string& path, const char* key) {
  return path.empty() ? std::string(key) : path + "." + key;
}

[[noreturn]] void type_error(const std::string& where, const char* expect) {
  throw ConfigError("field '" + where + "' must be " + expect);
}

}  // namespace

ConfigView::ConfigView(const nlohmann::json& obj, std::string path)
    : obj_(&obj), path_(std::move(path)) {
  if (!obj.is_object()) {
    throw ConfigError("'" + (path_.empty() ? std::string("<top>") : path_) +
                      "' must be a JSON object");
  }
}

std::string ConfigView::locate(const char* key) const {
  return join_path(path_, key);
}

bool ConfigView::has(const char* key) const { return obj_->contains(key); }

const nlohmann::json& ConfigView::require(const char* key) {
  const auto it = obj_->find(key);
  if (it == obj_->end()) {
    throw ConfigError((path_.empty() ? std::string("config")
                                     : "'" + path_ + "'") +
                      ": missing field '" + key + "'");
  }
  used_.insert(key);
  return *it;
}

double ConfigView::number(const char* key) {
  const auto& v = require(key);
  if (!v.is_number()) type_error(locate(key), "a number");
  return v.get<double>();
}

double ConfigView::number_or(const char* key, double def) {
  if (!has(key)) return def;
  return number(key);
}

std::int64_t ConfigView::integer(const char* key) {
  const auto& v = require(key);
  if (!v.is_number_integer()) type_error(locate(key), "an integer");
  return v.get<std::int64_t>();
}

std::int64_t ConfigView::integer_or(const char* key, std::int64_t def) {
  if (!has(key)) return def;
  return integer(key);
}

std::uint64_t ConfigView::uint_or(const char* key, std::uint64_t def) {
  if (!has(key)) return def;
  const auto& v = require(key);
  if (!v.is_number_integer()) type_error(locate(key), "a nonnegative integer");
  if (!v.is_number_unsigned() && v.get<std::int64_t>() < 0) {
    type_error(locate(key), "a nonnegative integer");
  }
  return v.get<std::uint64_t>();
}

bool ConfigView::boolean_or(const char* key, bool def) {
  if (!has(key)) return def;
  const auto& v = require(key);
  if (!v.is_boolean()) type_error(locate(key), "a boolean");
  return v.get<bool>();
}

std::string ConfigView::string(const char* key) {
  const auto& v = require(key);
  if (!v.is_string()) type_error(locate(key), "a string");
  return v.get<std::string>();
}

std::string ConfigView::string_or(const char* key, std::string def) {
  if (!has(key)) return def;
  return string(key);
}

std::vector<double> ConfigView::numbers(const char* key) {
  const auto& v = require(key);
  if (!v.is_array()) type_error(locate(key), "an array of numbers");
  std::vector<double> out;
  out.reserve(v.size());
  for (const auto& e : v) {
    if (!e.is_number()) type_error(locate(key), "an array of numbers");
    out.push_back(e.get<double>());
  }
  return out;
}

std::vector<double> ConfigView::numbers_or(const char* key,
                                           std::vector<double> def) {
  if (!has(key)) return def;
  return numbers(key);
}

const nlohmann::json& ConfigView::child(const char* key) {
  return require(key);
}

const nlohmann::json* ConfigView::child_opt(const char* key) {
  if (!has(key)) return nullptr;
  return &require(key);
}

void ConfigView::allow(const char* key) { used_.insert(key); }

void ConfigView::done() {
  std::string unknown;
  for (auto it = obj_->begin(); it != obj_->end(); ++it) {
    if (used_.count(it.key())) continue;
    if (!unknown.empty()) unknown += ", ";
    unknown += "'" + join_path(path_, it.key().c_str()) + "'";
  }
  if (!unknown.empty()) {
    throw ConfigError("unknown config field(s): " + unknown);
  }
}

std::function<double(double)> piecewise_linear(
    const std::vector<double>& times, const std::vector<double>& values,
    const std::string& path) {
  if (times.size() != values.size() || times.size() < 2) {
    throw ConfigError("'" + path +
                      "': times and values must have equal size >= 2");
  }
  for (std::size_t i = 0; i + 1 < times.size(); ++i) {
    if (!(times[i] < times[i + 1])) {
      throw ConfigError("'" + path + "': times must be strictly increasing");
    }
  }
  for (const double v : values) {
    if (!std::isfinite(v)) {
      throw ConfigError("'" + path + "': values must be finite");
    }
  }
  return [times, values](double t) {
    if (t <= times.front()) return values.front();
    if (t >= times.back()) return values.back();
    const auto it = std::upper_bound(times.begin(), times.end(), t);
    const std::size_t i = static_cast<std::size_t>(it - times.begin()) - 1;
    const double w = (t - times[i]) / (times[i + 1] - times[i]);
    return values[i] + w * (values[i + 1] - values[i]);
  };
}

std::shared_ptr<wiener::Kernel> parse_kernel(const nlohmann::json& j,
                                             const std::string& path) {
  ConfigView view(j, path);
  const std::string type = view.string("type");
  if (type == "ou") {
    view.done();
    return wiener::make_ou_kernel();
  }
  if (type == "weighted_ou") {
    const auto times = view.numbers("times");
    const auto values = view.numbers("values");
    const auto quad = static_cast<int>(view.integer_or("quad_steps", 4000));
    view.done();
    return wiener::make_weighted_ou_kernel(
        piecewise_linear(times, values, path), quad);
  }
  if (type == "beta") {
    const auto times = view.numbers("times");
    const auto values = view.numbers("values");
    const double upper = view.number("upper");
    const auto quad = static_cast<int>(view.integer_or("quad_steps", 4000));
    view.done();
    return wiener::make_beta_kernel(piecewise_linear(times, values, path),
                                    upper, quad);
  }
  if (type == "fractional") {
    const double q = view.number("q");
    const long trunc = static_cast<long>(view.integer_or("truncation", 100000));
    view.done();
    return wiener::make_fractional_kernel(q, trunc);
  }
  throw ConfigError("'" + path + ".type': unknown kernel '" + type +
                    "' (ou, weighted_ou, beta, fractional)");
}

bs::Payoff parse_payoff(const nlohmann::json& j, const std::string& path) {
  ConfigView view(j, path);
  const std::string type = view.string("type");
  if (type == "call") {
    const double k = view.number("strike");
    view.done();
    return bs::Payoff::call(k);
  }
  if (type == "put") {
    const double k = view.number("strike");
    view.done();
    return bs::Payoff::put(k);
  }
  if (type == "forward") {
    view.done();
    return bs::Payoff::forward();
  }
  if (type == "constant") {
    const double c = view.number("value");
    view.done();
    return bs::Payoff::constant(c);
  }
  if (type == "softplus_call") {
    const double k = view.number("strike");
    const double w = view.number("width");
    view.done();
    return bs::Payoff::softplus_call(k, w);
  }
  if (type == "table") {
    const auto xs = view.numbers("xs");
    const auto ys = view.numbers("ys");
    view.done();
    return bs::Payoff::table(xs, ys);
  }
  throw ConfigError("'" + path + ".type': unknown payoff '" + type +
                    "' (call, put, forward, constant, softplus_call, table)");
}

bs::Model parse_bs_model(const nlohmann::json& j, const std::string& path) {
  ConfigView view(j, path);
  bs::Model model;
  model.s0 = view.number("s0");
  model.sigma = view.number("sigma");
  model.r = view.number_or("r", 0.0);
  model.horizon = view.number("horizon");
  if (const auto* kernel = view.child_opt("kernel")) {
    model.kernel = parse_kernel(*kernel, view.locate("kernel"));
  }
  if (const auto* errors = view.child_opt("errors")) {
    ConfigView ev(*errors, view.locate("errors"));
    model.errors.b = ev.boolean_or("b", true);
    model.errors.s0 = ev.boolean_or("s0", true);
    model.errors.sigma = ev.boolean_or("sigma", true);
    model.errors.r = ev.boolean_or("r", true);
    ev.done();
  }
  view.done();
  model.validate();
  return model;
}

std::vector<lv::PolyTerm> parse_poly_terms(const nlohmann::json& j,
                                           const std::string& path) {
  if (!j.is_array() || j.empty()) {
    throw ConfigError("'" + path + "' must be a nonempty array of terms");
  }
  std::vector<lv::PolyTerm> terms;
  terms.reserve(j.size());
  for (std::size_t i = 0; i < j.size(); ++i) {
    ConfigView tv(j[i], path + "[" + std::to_string(i) + "]");
    lv::PolyTerm term;
    term.p = static_cast<int>(tv.integer("p"));
    term.q = static_cast<int>(tv.integer("q"));
    term.a = tv.number("a");
    tv.done();
    terms.push_back(term);
  }
  return terms;
}

lv::SigmaFn parse_sigma(const nlohmann::json& j, const std::string& path) {
  ConfigView view(j, path);
  const std::string type = view.string("type");
  if (type == "constant") {
    const double s = view.number("value");
    view.done();
    return lv::constant_sigma(s);
  }
  if (type == "cev") {
    const double a = view.number("a");
    const double g = view.number("gamma");
    view.done();
    return lv::cev_sigma(a, g);
  }
  if (type == "rational") {
    const double c0 = view.number("c0");
    const double c1 = view.number("c1");
    const double scale = view.number("scale");
    view.done();
    return lv::rational_sigma(c0, c1, scale);
  }
  if (type == "poly") {
    const auto terms = parse_poly_terms(view.child("terms"),
                                        view.locate("terms"));
    view.done();
    return lv::poly_sigma(terms);
  }
  throw ConfigError("'" + path + ".type': unknown sigma '" + type +
                    "' (constant, cev, rational, poly)");
}

lv::LocalVolModel parse_lv_model(const nlohmann::json& j,
                                 const std::string& path) {
  ConfigView view(j, path);
  lv::LocalVolModel model;
  model.x0 = view.number("x0");
  model.horizon = view.number("horizon");
  model.rate = lv::constant_rate(view.number_or("rate", 0.0));
  model.sigma = parse_sigma(view.child("sigma"), view.locate("sigma"));
  view.done();
  model.validate();
  return model;
}

ScalarFn parse_scalar_fn(const nlohmann::json& j, const std::string& path) {
  ConfigView view(j, path);
  const std::string type = view.string("type");
  if (type == "constant") {
    const double v = view.number("value");
    view.done();
    return {[v](double) { return v; }, [](double) { return 0.0; }};
  }
  if (type == "affine") {
    const double a = view.number("intercept");
    const double b = view.number("slope");
    view.done();
    return {[a, b](double x) { return a + b * x; },
            [b](double) { return b; }};
  }
  if (type == "poly") {
    const auto coeffs = view.numbers("coeffs");
    if (coeffs.empty()) {
      throw ConfigError("'" + view.locate("coeffs") + "' must be nonempty");
    }
    view.done();
    auto f = [coeffs](double x) {
      double acc = 0.0;
      for (std::size_t i = coeffs.size(); i-- > 0;) acc = acc * x + coeffs[i];
      return acc;
    };
    auto d1 = [coeffs](double x) {
      double acc = 0.0;
      for (std::size_t i = coeffs.size(); i-- > 1;) {
        acc = acc * x + coeffs[i] * static_cast<double>(i);
      }
      return acc;
    };
    return {f, d1};
  }
  throw ConfigError("'" + path + ".type': unknown function '" + type +
                    "' (constant, affine, poly)");
}

}  // namespace errcal::rep
