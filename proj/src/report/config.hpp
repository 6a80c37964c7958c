#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "bs/model.hpp"
#include "bs/payoff.hpp"
#include "levelvol/model.hpp"
#include "wiener/kernel.hpp"

namespace errcal::rep {

// ============================================================================
// Strict config access: every read marks its key consumed and done() rejects
// whatever is left, so a typo'd or out-of-place field fails the run with the
// offending path instead of being silently ignored.
// ============================================================================

class ConfigView {
 public:
  /// `path` is the dotted location of obj for diagnostics ("" = top level).
  ConfigView(const nlohmann::json& obj, std::string path);

  [[nodiscard]] bool has(const char* key) const;

  [[nodiscard]] double number(const char* key);
  [[nodiscard]] double number_or(const char* key, double def);
  [[nodiscard]] std::int64_t integer(const char* key);
  [[nodiscard]] std::int64_t integer_or(const char* key, std::int64_t def);
  [[nodiscard]] std::uint64_t uint_or(const char* key, std::uint64_t def);
  [[nodiscard]] bool boolean_or(const char* key, bool def);
  [[nodiscard]] std::string string(const char* key);
  [[nodiscard]] std::string string_or(const char* key, std::string def);
  [[nodiscard]] std::vector<double> numbers(const char* key);
  [[nodiscard]] std::vector<double> numbers_or(const char* key,
                                               std::vector<double> def);

  /// Raw subvalue (object/array), consumed; required.
  [[nodiscard]] const nlohmann::json& child(const char* key);
  /// Raw subvalue or nullptr when absent.
  [[nodiscard]] const nlohmann::json* child_opt(const char* key);

  /// Marks a key consumed without reading it (shared fields handled
  /// elsewhere, e.g. "format"/"out").
  void allow(const char* key);

  /// Throws ConfigError naming every unconsumed key.
  void done();

  [[nodiscard]] const std::string& path() const { return path_; }
  [[nodiscard]] std::string locate(const char* key) const;

 private:
  const nlohmann::json* obj_;
  std::string path_;
  std::set<std::string> used_;

  const nlohmann::json& require(const char* key);
};

/// Piecewise-linear interpolant of (times, values) with clamped ends;
/// times strictly increasing, sizes equal and >= 2.
[[nodiscard]] std::function<double(double)> piecewise_linear(
    const std::vector<double>& times, const std::vector<double>& values,
    const std::string& path);

/// Kernel config: {"type": "ou"} |
///   {"type": "weighted_ou", "times": [...], "values": [...]} |
///   {"type": "beta", "times": [...], "values": [...], "upper": U} |
///   {"type": "fractional", "q": q, "truncation": n}.
[[nodiscard]] std::shared_ptr<wiener::Kernel> parse_kernel(
    const nlohmann::json& j, const std::string& path);

/// Payoff config: {"type": "call"|"put"|"softplus_call", "strike": K,
/// ["width": w]} | {"type": "forward"} | {"type": "constant", "value": c} |
/// {"type": "table", "xs": [...], "ys": [...]}.
[[nodiscard]] bs::Payoff parse_payoff(const nlohmann::json& j,
                                      const std::string& path);

/// Lognormal model config: {"s0", "sigma", "r", "horizon", ["kernel"],
/// ["errors": {"b","s0","sigma","r"}]}.
[[nodiscard]] bs::Model parse_bs_model(const nlohmann::json& j,
                                       const std::string& path);

/// Volatility surface config: {"type": "constant", "value": s} |
/// {"type": "cev", "a": a, "gamma": g} |
/// {"type": "rational", "c0": c0, "c1": c1, "scale": s} |
/// {"type": "poly", "terms": [{"p", "q", "a"}, ...]}.
[[nodiscard]] lv::SigmaFn parse_sigma(const nlohmann::json& j,
                                      const std::string& path);

[[nodiscard]] std::vector<lv::PolyTerm> parse_poly_terms(
    const nlohmann::json& j, const std::string& path);

/// Level-volatility model config: {"x0", "horizon", "rate", "sigma": {...}}.
[[nodiscard]] lv::LocalVolModel parse_lv_model(const nlohmann::json& j,
                                               const std::string& path);

/// Scalar function with derivative, for the discrete-scheme sigma:
/// {"type": "constant", "value": v} |
/// {"type": "affine", "intercept": a, "slope": b} |
/// {"type": "poly", "coeffs": [c0, c1, ...]}.
struct ScalarFn {
  std::function<double(double)> f;
  std::function<double(double)> d1;
};

[[nodiscard]] ScalarFn parse_scalar_fn(const nlohmann::json& j,
                                       const std::string& path);

}  // namespace errcal::rep
