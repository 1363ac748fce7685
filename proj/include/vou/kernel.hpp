#pragma once

#include <span>
#include <string>
#include <vector>

#include "json.hpp"

namespace vou {

enum class KernelKind { Fractional, Log, ExpSum, DampedFractional };

// A completely monotone Volterra kernel K on (0, inf).
//
// Supported families:
//   Fractional(alpha)          K(t) = t^(alpha-1) / Gamma(alpha),        alpha in (1/2, 1]
//   Log(alpha, gamma)          K(t) = log(1 + 1/t)
//   ExpSum(c_i, lambda_i)      K(t) = sum_i c_i exp(-lambda_i t),        c_i > 0, lambda_i >= 0
//   DampedFractional(alpha, l) K(t) = t^(alpha-1) exp(-l t) / Gamma(alpha)
//
// alpha is the singularity exponent (t^(1-alpha) K(t) bounded near 0) and gamma
// the Hoelder exponent of the resulting process. For the log kernel both are
// free within alpha in (1/2, 1], gamma in (0, 1/2).
//
// JSON form: {"kind": "fractional", "params": {"alpha": 0.75}}
//            {"kind": "log", "params": {"alpha": 0.99, "gamma": 0.49}}
//            {"kind": "exp_sum", "params": {"coefficients": [1, 2], "rates": [1, 2]}}
//            {"kind": "damped_fractional", "params": {"alpha": 0.75, "rate": 1}}
class KernelSpec {
 public:
  static KernelSpec fractional(double alpha);
  static KernelSpec log_kernel(double alpha = 0.99, double gamma = 0.49);
  static KernelSpec exp_sum(std::vector<double> coefficients, std::vector<double> rates);
  static KernelSpec damped_fractional(double alpha, double rate);
  // K == 1, the classical Ornstein-Uhlenbeck case.
  static KernelSpec constant_one() { return exp_sum({1.0}, {0.0}); }

  KernelKind kind() const noexcept { return kind_; }
  double alpha() const noexcept { return alpha_; }
  double gamma() const noexcept { return gamma_; }
  // K(0+); +inf for singular kernels.
  double k_zero_plus() const noexcept;
  std::span<const double> coefficients() const noexcept { return coefficients_; }
  std::span<const double> rates() const noexcept { return rates_; }
  double rate() const noexcept { return rate_; }
  std::string name() const;

  // K(t), t > 0.
  double value(double t) const;
  // K'(t), t > 0.
  double derivative(double t) const;
  // int_0^inf K; +inf when not integrable.
  double l1_norm() const;
  // int_a^b K(u) du for 0 <= a < b.
  double integral(double a, double b) const;
  // int_a^b u K(u) du for 0 <= a < b.
  double first_moment(double a, double b) const;
  // (K * K)(t) = int_0^t K(t - s) K(s) ds.
  double self_convolution(double t) const;

  // Exponent p for integrate_from_zero() so that K^power becomes smooth after
  // the substitution u = b w^p.
  double zero_cell_power(int power) const;
  // True when K decays like a power at infinity (non-integrable kernels and
  // their resolvents have algebraic tails).
  bool has_power_tail() const noexcept;
  bool is_singular() const noexcept;

  friend bool operator==(const KernelSpec&, const KernelSpec&) = default;

 private:
  KernelSpec() = default;

  KernelKind kind_ = KernelKind::Fractional;
  double alpha_ = 1.0;
  double gamma_ = 0.5;
  double rate_ = 0.0;
  double inv_gamma_alpha_ = 1.0;
  std::vector<double> coefficients_;
  std::vector<double> rates_;
};

// sup over the grid points t_k = k dt in (0, T] of t^(1-alpha)|K(t)| + t^(2-alpha)|K'(t)|.
double assumption_a_bound(const KernelSpec& kernel, double dt, double horizon);

void to_json(nlohmann::json& j, const KernelSpec& kernel);
KernelSpec kernel_from_json(const nlohmann::json& j);

}  // namespace vou
