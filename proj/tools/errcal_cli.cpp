// errcal command line front end.  Thin shell over the C API: reads a JSON
// config file, forwards flag overrides as a JSON fragment, writes the
// rendered report to the requested destination, and maps the library status
// to the process exit code (0 ok, 2 config, 3 capability, 4 numeric,
// 1 internal).  All numerics, parallelism, and validation live behind the
// C API; this translation unit stays single threaded.
#include <cinttypes>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "errcal.h"

namespace {

struct Options {
  std::string config_path;
  std::uint64_t seed = 0;
  std::uint64_t paths = 0;
  std::uint64_t steps = 0;
  double theta = 0.0;
  std::string out;
  std::string format;
  bool has_seed = false;
  bool has_paths = false;
  bool has_steps = false;
  bool has_theta = false;
  bool has_out = false;
  bool has_format = false;
};

// JSON string escaping for the two free-text overrides (out, format).
std::string json_quote(const std::string& s) {
  std::string out = "\"";
  for (const char c : s) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\r': out += "\\r"; break;
      case '\t': out += "\\t"; break;
      default:
        if (static_cast<unsigned char>(c) < 0x20) {
          char buf[8];
          std::snprintf(buf, sizeof buf, "\\u%04x", c);
          out += buf;
        } else {
          out += c;
        }
    }
  }
  out += "\"";
  return out;
}

std::string build_overrides(const Options& opt) {
  std::ostringstream os;
  os.imbue(std::locale::classic());
  bool first = true;
  const auto sep = [&first, &os] {
    os << (first ? "{" : ",");
    first = false;
  };
  if (opt.has_seed) {
    sep();
    os << "\"seed\":" << opt.seed;
  }
  if (opt.has_paths) {
    sep();
    os << "\"paths\":" << opt.paths;
  }
  if (opt.has_steps) {
    sep();
    os << "\"steps\":" << opt.steps;
  }
  if (opt.has_theta) {
    sep();
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", opt.theta);
    os << "\"theta\":" << buf;
  }
  if (opt.has_out) {
    sep();
    os << "\"out\":" << json_quote(opt.out);
  }
  if (opt.has_format) {
    sep();
    os << "\"format\":" << json_quote(opt.format);
  }
  if (first) return "";
  os << "}";
  return os.str();
}

int run(const std::string& command, const Options& opt) {
  std::ifstream in(opt.config_path, std::ios::binary);
  if (!in) {
    std::cerr << "error: cannot open config file '" << opt.config_path
              << "'\n";
    return 2;
  }
  std::ostringstream buffer;
  buffer << in.rdbuf();
  const std::string config_text = buffer.str();
  const std::string overrides = build_overrides(opt);

  ec_report* report = nullptr;
  const ec_status status =
      ec_run(command.c_str(), config_text.c_str(),
             overrides.empty() ? nullptr : overrides.c_str(), &report);
  if (status != EC_OK) {
    std::cerr << "error: " << ec_last_error() << "\n";
    return static_cast<int>(status);
  }

  const char* text = ec_report_render(report, nullptr);
  if (text == nullptr) {
    std::cerr << "error: " << ec_last_error() << "\n";
    ec_report_free(report);
    return 1;
  }

  const std::string out_path = ec_report_out_path(report);
  int rc = 0;
  if (out_path.empty()) {
    std::cout << text;
  } else {
    std::ofstream os(out_path, std::ios::binary);
    if (!os) {
      std::cerr << "error: cannot write to '" << out_path << "'\n";
      rc = 1;
    } else {
      os << text;
    }
  }
  ec_report_free(report);
  return rc;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{std::string("errcal ") + ec_version() +
               ": error calculus for pricing and simulation"};
  app.require_subcommand(1);

  Options opt;
  std::string command;

  const auto add_common = [&](CLI::App* sub, const char* name) {
    sub->add_option("-c,--config", opt.config_path, "JSON config file")
        ->required();
    sub->add_option("--seed", opt.seed, "RNG seed override")
        ->each([&opt](const std::string&) { opt.has_seed = true; });
    sub->add_option("--paths", opt.paths, "sample count override")
        ->each([&opt](const std::string&) { opt.has_paths = true; });
    sub->add_option("--steps", opt.steps, "time step count override")
        ->each([&opt](const std::string&) { opt.has_steps = true; });
    sub->add_option("--theta", opt.theta, "perturbation size override")
        ->each([&opt](const std::string&) { opt.has_theta = true; });
    sub->add_option("--out", opt.out, "output file ('' = stdout) override")
        ->each([&opt](const std::string&) { opt.has_out = true; });
    sub->add_option("--format", opt.format, "csv or json override")
        ->each([&opt](const std::string&) { opt.has_format = true; });
    sub->callback([&command, name] { command = name; });
  };

  add_common(app.add_subcommand("price", "option value and greeks"), "price");
  add_common(app.add_subcommand(
                 "sens", "error variances and biases along a path"),
             "sens");
  add_common(app.add_subcommand(
                 "levelvol", "level-dependent volatility sensitivities"),
             "levelvol");
  add_common(app.add_subcommand(
                 "ibp", "discrete-scheme integration-by-parts derivatives"),
             "ibp");
  add_common(app.add_subcommand(
                 "perturb-check", "brute-force perturbation validation"),
             "perturb-check");
  add_common(app.add_subcommand("triangle", "triangulated point errors"),
             "triangle");

  CLI11_PARSE(app, argc, argv);
  return run(command, opt);
}
