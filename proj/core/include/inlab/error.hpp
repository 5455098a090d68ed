#pragma once

#include <stdexcept>
#include <string>

namespace inlab {

// Bad or inconsistent configuration (mismatched dimensions, unknown names).
// The CLI maps this to exit code 2.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A trajectory or model parameter outside its domain (e.g. non-positive period).
class ParameterError : public ConfigError {
 public:
  using ConfigError::ConfigError;
};

// A value outside its admissible range (e.g. a reference angle beyond joint limits).
class RangeError : public ConfigError {
 public:
  using ConfigError::ConfigError;
};

// Malformed or incompatible file (checkpoint magic/version, truncated data, bad CSV).
class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Non-finite state after integration. The CLI maps this to exit code 3.
class SimulationBlowup : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace inlab
