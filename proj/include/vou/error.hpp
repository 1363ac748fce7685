#pragma once

#include <stdexcept>
#include <string>

namespace vou {

// Argument outside the mathematical domain (t <= 0, beta >= 0, alpha out of range).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Inputs that are individually valid but cannot be combined (grid mismatch, z0 != 0).
class UsageError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A numerical procedure failed (negative resolvent mass, non-PD covariance).
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Estimator denominator vanished, e.g. a constant path.
class DegenerateError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class PlanningError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

// Configuration file failed to parse or validate.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

}  // namespace vou
