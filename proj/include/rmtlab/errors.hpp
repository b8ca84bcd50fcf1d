#pragma once

#include <stdexcept>
#include <string>

namespace rmtlab {

// Base of every error thrown by the library. The CLI maps subclasses onto
// process exit codes (config -> 2, numerical/io -> 3).
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Invalid or unsupported configuration (unknown entry law, bad grid, ...).
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Argument outside the mathematical domain of an operation.
class DomainError : public Error {
 public:
  using Error::Error;
};

// Non-convergence, failed residual checks, broken invariants at runtime.
class NumericalError : public Error {
 public:
  using Error::Error;
};

// SDE integration could not keep particle ordering.
class IntegrationError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

// Metropolis chain failed its acceptance-rate health check.
class SamplerHealthError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace rmtlab
