#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "vou/kernel.hpp"

namespace vou {

// Decay model for E_beta beyond the computed horizon, fitted on the tail of the grid.
struct TailModel {
  enum class Kind { None, Power, Exponential };
  Kind kind = Kind::None;
  double amplitude = 0.0;
  double exponent = 0.0;  // E ~ A t^(-p) or A exp(-r t)

  double value(double t) const;
  double integral_from(double t) const;         // int_t^inf model
  double square_integral_from(double t) const;  // int_t^inf model^2
  std::string describe() const;
};

// Resolvent of the second kind: E = K + beta K * E, beta < 0.
//
// The solver works with F = K * E, which is continuous with F(0) = 0 and solves
// F = K*K + beta K * F. F is taken piecewise linear and K is integrated exactly
// against each linear piece (product trapezoidal rule); E = K + beta F.
class SecondKindResolvent {
 public:
  SecondKindResolvent(const KernelSpec& kernel, double beta, double dt, double horizon);

  const KernelSpec& kernel() const noexcept { return kernel_; }
  double beta() const noexcept { return beta_; }
  double grid_step() const noexcept { return dt_; }
  std::size_t steps() const noexcept { return conv_.size() - 1; }
  double horizon() const noexcept { return dt_ * static_cast<double>(steps()); }

  // E(t_k), k = 0..n; entry 0 is K(0+) (possibly inf).
  const std::vector<double>& values() const noexcept { return values_; }
  // F(t_k) = (K * E)(t_k).
  const std::vector<double>& convolution() const noexcept { return conv_; }
  // int_0^{t_k} E.
  const std::vector<double>& cumulative_integral() const noexcept { return integral_; }
  // int_{t_{k-1}}^{t_k} E^2 for k = 1..n (entry 0 is zero).
  const std::vector<double>& square_cells() const noexcept { return square_cells_; }
  const TailModel& tail() const noexcept { return tail_; }

  // Continuous evaluation, t > 0; the tail model is used past the horizon.
  double operator()(double t) const;
  // int_0^t E for 0 <= t <= horizon.
  double integral_to(double t) const;

  // max_k |E_k - K(t_k) - beta (K*E)_k| / (|K(t_k)| + |beta (K*E)_k|), K*E rebuilt from the cell moments of K.
  double residual() const;

 private:
  KernelSpec kernel_;
  double beta_;
  double dt_;
  std::vector<double> cell_a_, cell_b_;  // product-trapezoid weights of K per cell
  std::vector<double> kk_;
  std::vector<double> conv_;
  std::vector<double> values_;
  std::vector<double> integral_;
  std::vector<double> square_cells_;
  TailModel tail_;
};

struct TailIntegrals {
  double integral = 0.0;         // int_0^T E
  double square_integral = 0.0;  // int_0^T E^2
  double tail_integral = 0.0;    // extrapolated int_T^inf E
  double tail_square = 0.0;      // extrapolated int_T^inf E^2
  double total() const { return integral + tail_integral; }
  double total_square() const { return square_integral + tail_square; }
  std::string tail_model;
};

TailIntegrals e_beta_tail_integrals(const SecondKindResolvent& res);

// int_0^upper E(h + r) E(r) dr; used for the stationary autocovariance.
double lagged_product_integral(const SecondKindResolvent& res, double lag, double upper);

// Limit of int_0^T E as T -> inf: 1 / (1/||K|| + |beta|).
double e_beta_integral_limit(const KernelSpec& kernel, double beta);

}  // namespace vou
