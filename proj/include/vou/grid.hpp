#pragma once

#include <cmath>
#include <cstddef>
#include <string>

#include "vou/error.hpp"

namespace vou {

// Number of uniform steps of size dt in [0, T]; T must be an integer multiple of dt.
inline std::size_t step_count(double horizon, double dt) {
  if (!(dt > 0.0) || !std::isfinite(dt)) throw DomainError("grid step must be positive");
  if (!(horizon >= dt)) throw DomainError("horizon must be at least one grid step");
  const double r = horizon / dt;
  const double n = std::round(r);
  if (std::abs(r - n) > 1e-8 * n) {
    throw DomainError("horizon " + std::to_string(horizon) + " is not a multiple of step " + std::to_string(dt));
  }
  return static_cast<std::size_t>(n);
}

// Integer factor r with coarse = r * fine, or UsageError when the grids do not nest.
inline std::size_t nesting_factor(double fine, double coarse) {
  const double r = coarse / fine;
  const double k = std::round(r);
  if (k < 1.0 || std::abs(r - k) > 1e-8 * k) {
    throw UsageError("grid step " + std::to_string(fine) + " does not nest into " + std::to_string(coarse));
  }
  return static_cast<std::size_t>(k);
}

}  // namespace vou
