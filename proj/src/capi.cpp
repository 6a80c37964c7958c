#include "errcal.h"

#include <cstring>
#include <exception>
#include <new>
#include <string>

#include <json.hpp>

#include "core/errors.hpp"
#include "report/commands.hpp"
#include "report/report.hpp"

namespace {

thread_local std::string g_last_error;

void set_error(const std::string& message) { g_last_error = message; }

}  // namespace

struct ec_report {
  errcal::rep::Report report;
  std::string rendered;  // backing store for ec_report_render
};

extern "C" {

ec_status ec_run(const char* command, const char* config_json,
                 const char* overrides_json, ec_report** out) {
  if (out != nullptr) *out = nullptr;
  if (command == nullptr || config_json == nullptr || out == nullptr) {
    set_error("ec_run: command, config_json, and out must be non-NULL");
    return EC_CONFIG;
  }
  try {
    nlohmann::json config = nlohmann::json::parse(config_json);
    if (!config.is_object()) {
      set_error("config must be a JSON object");
      return EC_CONFIG;
    }
    if (overrides_json != nullptr && overrides_json[0] != '\0') {
      const nlohmann::json overrides = nlohmann::json::parse(overrides_json);
      if (!overrides.is_object()) {
        set_error("overrides must be a JSON object");
        return EC_CONFIG;
      }
      for (const auto& item : overrides.items()) {
        config[item.key()] = item.value();
      }
    }
    auto* handle = new ec_report{};
    try {
      handle->report = errcal::rep::run_command(command, config);
      // The serializers enforce the nonnegative-gamma invariant; render once
      // here so a violation surfaces as EC_NUMERIC instead of a NULL render.
      (void)handle->report.render("");
    } catch (...) {
      delete handle;
      throw;
    }
    *out = handle;
    return EC_OK;
  } catch (const nlohmann::json::parse_error& e) {
    set_error(std::string("config is not valid JSON: ") + e.what());
    return EC_CONFIG;
  } catch (const errcal::ConfigError& e) {
    set_error(e.what());
    return EC_CONFIG;
  } catch (const errcal::CapabilityError& e) {
    set_error(e.what());
    return EC_CAPABILITY;
  } catch (const errcal::NumericError& e) {
    set_error(e.what());
    return EC_NUMERIC;
  } catch (const std::exception& e) {
    set_error(e.what());
    return EC_INTERNAL;
  } catch (...) {
    set_error("unknown failure");
    return EC_INTERNAL;
  }
}

const char* ec_report_render(ec_report* report, const char* format) {
  if (report == nullptr) {
    set_error("ec_report_render: report is NULL");
    return nullptr;
  }
  try {
    const std::string fmt = format == nullptr ? "" : format;
    report->rendered = report->report.render(fmt);
    return report->rendered.c_str();
  } catch (const std::exception& e) {
    set_error(e.what());
    return nullptr;
  }
}

const char* ec_report_out_path(const ec_report* report) {
  if (report == nullptr) return "";
  return report->report.out_path.c_str();
}

void ec_report_free(ec_report* report) { delete report; }

const char* ec_last_error(void) { return g_last_error.c_str(); }

const char* ec_version(void) { return errcal::rep::kVersion; }

}  // extern "C"
