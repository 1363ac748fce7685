#pragma once

#include <cmath>
#include <vector>

#include <Eigen/Dense>

namespace oracle {

// Two-parameter Mittag-Leffler E_{a,b}(z) by its power series; fine for |z| <= 4.
inline double mittag_leffler(double a, double b, double z) {
  double sum = 0.0, zk = 1.0;
  for (int k = 0; k < 500; ++k) {
    const double term = zk / std::tgamma(a * k + b);
    sum += term;
    if (k > 5 && std::abs(term) < 1e-17 * std::max(1.0, std::abs(sum))) break;
    zk *= z;
  }
  return sum;
}

// E_beta for K(t) = t^(a-1)/Gamma(a).
inline double fractional_resolvent(double a, double beta, double t) {
  return std::pow(t, a - 1.0) * mittag_leffler(a, a, beta * std::pow(t, a));
}

// Classical OU drift estimates from left-point sums, solved as a 2x2 system.
struct OuMle {
  double b = 0, beta = 0, b_known_beta = 0, beta_known_b = 0;
};

inline OuMle classical_ou(const std::vector<double>& x, double dt, double b_true, double beta_true) {
  const std::size_t n = x.size() - 1;
  const double T = dt * n;
  double sx = 0, sxx = 0, sxdx = 0;
  for (std::size_t i = 0; i < n; ++i) {
    sx += x[i] * dt;
    sxx += x[i] * x[i] * dt;
    sxdx += x[i] * (x[i + 1] - x[i]);
  }
  const double zt = x[n] - x[0];
  Eigen::Matrix2d a;
  a << T, sx, sx, sxx;
  const Eigen::Vector2d sol = a.ldlt().solve(Eigen::Vector2d(zt, sxdx));
  return {sol(0), sol(1), (zt - beta_true * sx) / T, (sxdx - b_true * sx) / sxx};
}

}  // namespace oracle
