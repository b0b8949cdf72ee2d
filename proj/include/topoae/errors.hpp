#pragma once

#include <stdexcept>
#include <string>

namespace topoae {

// Bad argument values or shapes.
struct ArgumentError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// A requested object would exceed a configured size cap.
struct SizeError : std::length_error {
  using std::length_error::length_error;
};

// An iterative solver failed to converge.
struct ConvergenceError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A linear system is rank deficient or too ill-conditioned to factor.
struct ConditioningError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Non-finite or otherwise unusable input data.
struct InputError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Non-finite values produced during a numerical computation.
struct NumericalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Malformed file contents.
struct FormatError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Inconsistent configuration (component shapes that do not fit together,
// invalid experiment config fields).
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace topoae
