#include "report/report.hpp"

#include <cinttypes>
#include <cmath>
#include <cstdio>

#include "core/errors.hpp"

namespace errcal::rep {

namespace {

const char* const kColumns[] = {"quantity", "t",       "value",
                                "gamma_B",  "gamma_S0", "gamma_sigma",
                                "gamma_r",  "bias",     "std_error",
                                "config_hash"};

void check_gamma(const std::optional<double>& g, const std::string& quantity,
                 const char* column) {
  if (g && (!(*g >= 0.0) || !std::isfinite(*g))) {
    throw NumericError("report row '" + quantity + "': " + column + " = " +
                       format_double(*g) +
                       " violates the nonnegative-variance invariant");
  }
}

void check_row(const Row& row) {
  check_gamma(row.gamma_b, row.quantity, "gamma_B");
  check_gamma(row.gamma_s0, row.quantity, "gamma_S0");
  check_gamma(row.gamma_sigma, row.quantity, "gamma_sigma");
  check_gamma(row.gamma_r, row.quantity, "gamma_r");
}

void append_cell(std::string& out, const std::optional<double>& v) {
  out += ',';
  if (v) out += format_double(*v);
}

nlohmann::json cell_json(const std::optional<double>& v) {
  if (!v) return nullptr;
  return *v;
}

}  // namespace

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string config_hash_hex(const nlohmann::json& config) {
  const std::string canon = config.dump();
  std::uint64_t h = 14695981039346656037ull;
  for (const unsigned char c : canon) {
    h ^= c;
    h *= 1099511628211ull;
  }
  char buf[24];
  std::snprintf(buf, sizeof(buf), "%016" PRIx64, h);
  return buf;
}

std::string Report::to_csv() const {
  std::string out;
  out += "# command=" + command + "\n";
  out += "# version=" + std::string(kVersion) + "\n";
  out += "# seed=" + std::to_string(seed) + "\n";
  out += "# config_hash=" + config_hash + "\n";
  for (std::size_t i = 0; i < std::size(kColumns); ++i) {
    if (i) out += ',';
    out += kColumns[i];
  }
  out += '\n';
  for (const Row& row : rows) {
    check_row(row);
    out += row.quantity;
    append_cell(out, row.t);
    append_cell(out, row.value);
    append_cell(out, row.gamma_b);
    append_cell(out, row.gamma_s0);
    append_cell(out, row.gamma_sigma);
    append_cell(out, row.gamma_r);
    append_cell(out, row.bias);
    append_cell(out, row.std_error);
    out += ',';
    out += config_hash;
    out += '\n';
  }
  return out;
}

std::string Report::to_json() const {
  nlohmann::json doc;
  doc["metadata"] = {{"command", command},
                     {"version", kVersion},
                     {"seed", seed},
                     {"config_hash", config_hash}};
  auto& rows_json = doc["rows"] = nlohmann::json::array();
  for (const Row& row : rows) {
    check_row(row);
    rows_json.push_back({{"quantity", row.quantity},
                         {"t", cell_json(row.t)},
                         {"value", cell_json(row.value)},
                         {"gamma_B", cell_json(row.gamma_b)},
                         {"gamma_S0", cell_json(row.gamma_s0)},
                         {"gamma_sigma", cell_json(row.gamma_sigma)},
                         {"gamma_r", cell_json(row.gamma_r)},
                         {"bias", cell_json(row.bias)},
                         {"std_error", cell_json(row.std_error)},
                         {"config_hash", config_hash}});
  }
  return doc.dump(2) + "\n";
}

std::string Report::render(const std::string& format) const {
  const std::string& fmt = format.empty() ? default_format : format;
  if (fmt == "csv" || fmt.empty()) return to_csv();
  if (fmt == "json") return to_json();
  throw ConfigError("unknown output format '" + fmt + "' (csv or json)");
}

}  // namespace errcal::rep
