#pragma once

#include <stdexcept>
#include <string>

namespace nibvp {

// Raised for malformed inputs: bad sizes, out-of-range indices, invalid configuration.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DimensionError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

[[noreturn]] void throw_dimension(const std::string& where, long expected, long got);

}  // namespace nibvp
