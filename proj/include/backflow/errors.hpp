#pragma once

#include <stdexcept>
#include <string>

namespace backflow {

// Precondition violated by a caller-supplied value.
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A sampled function is undefined or non-finite where it must be evaluated.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Base for failures of a numerical method on otherwise valid input.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ConvergenceFailure : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class UnstableConfiguration : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class AliasingError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class InsufficientHistory : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

// Malformed or inconsistent run configuration.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Precondition check; throws InvalidArgument with `message` when violated.
inline void require(bool condition, const std::string& message) {
  if (!condition) throw InvalidArgument(message);
}

}  // namespace backflow
