#pragma once

#include <optional>

#include "vou/kernel.hpp"
#include "vou/second_kind.hpp"

namespace vou {

// C_alpha = (1/pi) int_0^inf du / (1 + 2 u^alpha cos(pi alpha / 2) + u^(2 alpha)), alpha in (1/2, 1].
double c_alpha(double alpha);

struct StationaryMoments {
  double m1 = 0.0;
  double m2 = 0.0;
  double m_var = 0.0;
  std::optional<double> c_alpha;  // fractional kernels only
};

// m1 = x0 / (1 + ||K|| |beta|) + b ||K|| / (1 + ||K|| |beta|), which is b / |beta| when ||K|| = inf.
double stationary_mean(const KernelSpec& kernel, double b, double beta, double x0);

// For fractional kernels m_var = C_alpha sigma^2 |beta|^(1/alpha - 2). Otherwise
// m_var = sigma^2 int_0^inf E^2 from `resolvent`, or from a default grid when none is given.
StationaryMoments stationary_moments(const KernelSpec& kernel, double b, double beta, double sigma, double x0,
                                     const SecondKindResolvent* resolvent = nullptr);

// sigma^2 int_0^inf E^2 from the grid with the fitted tail.
double stationary_variance_numeric(const SecondKindResolvent& resolvent, double sigma);

// sigma^2 int_0^inf E(h + r) E(r) dr.
double stationary_autocovariance(const SecondKindResolvent& resolvent, double sigma, double lag);

}  // namespace vou
