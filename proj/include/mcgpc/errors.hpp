#pragma once

#include <stdexcept>
#include <string>

namespace mcgpc {

// Invalid user input: bad parameters, malformed config, unsupported options.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Fewer quadrature points than basis modes.
class QuadratureError : public ConfigError {
 public:
  using ConfigError::ConfigError;
};

// Container sizes that do not agree with the basis or ensemble they are used with.
class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Integration blow-up or a numerical scheme leaving its validity range.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace mcgpc
