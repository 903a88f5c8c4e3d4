#pragma once

#include <stdexcept>
#include <string>

namespace distdyn {

// Error categories map onto distinct CLI exit codes.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Bad flags, malformed config values, inconsistent run settings.
struct ConfigError : Error {
  using Error::Error;
  static constexpr int exit_code = 2;
};

// Malformed or inconsistent input data (unbalanced panel, bad CSV, ...).
struct DataError : Error {
  using Error::Error;
  static constexpr int exit_code = 3;
};

// Numerical failure (degenerate sample, non-convergence, sampler stall).
struct NumericError : Error {
  using Error::Error;
  static constexpr int exit_code = 4;
};

}  // namespace distdyn
