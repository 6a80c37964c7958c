#pragma once

#include <string>

#include <json.hpp>

#include "report/report.hpp"

namespace errcal::rep {

/// Executes one front-end command on a fully merged config object.
/// Commands: price, sens, levelvol, ibp, perturb-check, triangle.
/// Throws ConfigError / CapabilityError / NumericError per the shared
/// taxonomy; the caller maps them to exit codes.
[[nodiscard]] Report run_command(const std::string& command,
                                 const nlohmann::json& config);

}  // namespace errcal::rep
