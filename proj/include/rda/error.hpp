#ifndef RDA_ERROR_HPP
#define RDA_ERROR_HPP

#include <stdexcept>
#include <string>

namespace rda {

// Error categories used across the library. The CLI maps UsageError and
// ConfigError to exit code 2, everything else to 1.

struct DimensionError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct ParameterError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct StateError : std::logic_error {
  using std::logic_error::logic_error;
};

struct NumericError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ConfigError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct UsageError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

}  // namespace rda

#endif  // RDA_ERROR_HPP
