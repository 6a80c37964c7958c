#pragma once

#include <stdexcept>
#include <string>

namespace errcal {

/// Error taxonomy shared by the whole library.  The three categories map
/// one-to-one onto CLI exit codes (config/input -> 2, capability -> 3,
/// numeric -> 4); anything else surfaces as an internal error.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

/// Requested operation needs data the inputs do not carry (missing
/// derivatives, missing bias, disabled error source, unsupported kernel).
class CapabilityError : public std::runtime_error {
 public:
  explicit CapabilityError(const std::string& what) : std::runtime_error(what) {}
};

/// Numerical failure at run time: non-finite intermediate, exploded path,
/// exhausted budget mid-flight, singular system.
class NumericError : public std::runtime_error {
 public:
  explicit NumericError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace errcal
