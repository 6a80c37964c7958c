#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

namespace errcal::rep {

inline constexpr const char* kVersion = "0.1.0";

/// One report row.  Absent cells render as empty CSV fields / JSON nulls.
/// Gamma cells are variances and must be nonnegative; the serializers
/// enforce that, so a noise-dominated Monte Carlo estimate surfaces as a
/// numeric failure instead of a silently negative variance.
struct Row {
  std::string quantity;
  std::optional<double> t;
  std::optional<double> value;
  std::optional<double> gamma_b;
  std::optional<double> gamma_s0;
  std::optional<double> gamma_sigma;
  std::optional<double> gamma_r;
  std::optional<double> bias;
  std::optional<double> std_error;
};

struct Report {
  std::string command;
  std::uint64_t seed = 0;
  std::string config_hash;      // 16 hex digits over the effective config
  std::string default_format;   // "csv" or "json", from the config
  std::string out_path;         // "" = stdout
  std::vector<Row> rows;

  [[nodiscard]] std::string to_csv() const;
  [[nodiscard]] std::string to_json() const;

  /// format = "csv" | "json" | "" (config default).
  [[nodiscard]] std::string render(const std::string& format) const;
};

/// %.17g: every double round-trips, identical across runs.
[[nodiscard]] std::string format_double(double v);

/// FNV-1a 64 over the canonical (sorted-key) dump of the effective config.
[[nodiscard]] std::string config_hash_hex(const nlohmann::json& config);

}  // namespace errcal::rep
