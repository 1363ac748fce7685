#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "vou/first_kind.hpp"
#include "vou/kernel.hpp"
#include "vou/second_kind.hpp"
#include "vou/transforms.hpp"

namespace vou {

// EulerProduct is the Euler recursion with cell-averaged kernel weights
// (SimulationOptions::euler_rule = ProductIntegration).
enum class Scheme { Euler, EulerProduct, Resolvent, ExactCholesky, Stationary };

std::string to_string(Scheme scheme);
Scheme scheme_from_string(const std::string& name);

// X_t = x0 + int_0^t K(t - s)(b + beta X_s) ds + int_0^t K(t - s) sigma dB_s.
struct VouParams {
  double b = 1.2;
  double beta = -1.0;
  double sigma = 0.3;
  double x0 = 1.0;

  void validate(bool allow_zero_sigma = false) const;
  friend bool operator==(const VouParams&, const VouParams&) = default;
};

struct SamplePath : PathOnGrid {
  std::uint64_t seed = 0;
  Scheme scheme = Scheme::Euler;
  std::vector<double> noise;  // xi_1..xi_n when retained
  std::string warning;
};

struct SimulationOptions {
  bool retain_noise = false;
  bool allow_zero_sigma = false;  // testing only
  // Kernel weights of the explicit scheme. PointValues is the plain Euler recursion;
  // ProductIntegration replaces K(t_{k+1} - t_i) by the average of K over [t_{k+1} - t_{i+1}, t_{k+1} - t_i].
  ResolventRule euler_rule = ResolventRule::PointValues;
};

// Explicit scheme on t_k = k T / n:
//   X_{k+1} = x0 + sum_{i=0}^k K(t_{k+1} - t_i) [dt (b + beta X_i) + sigma sqrt(dt) xi_{i+1}].
// O(n^2) per path.
class EulerSimulator {
 public:
  EulerSimulator(const KernelSpec& kernel, const VouParams& params, std::size_t n, double horizon,
                 SimulationOptions options = {});
  SamplePath simulate(std::uint64_t seed) const;
  double grid_step() const noexcept { return dt_; }

 private:
  VouParams params_;
  std::size_t n_;
  double dt_;
  SimulationOptions options_;
  std::vector<double> kv_;
};

SamplePath simulate_euler(const KernelSpec& kernel, const VouParams& params, std::size_t n, double horizon,
                          std::uint64_t seed, SimulationOptions options = {});

// Variation of constants:
//   X_k = (1 + beta eps_k) x0 + eps_k b + sigma sqrt(dt) sum_{i=1}^k w_{k-i+1} xi_i,
// eps_k = int_0^{t_k} E and w_m^2 the mean of E^2 over cell m, so that the marginal
// variance matches sigma^2 int_0^{t_k} E^2. The resolvent grid may refine the path grid.
class ResolventSimulator {
 public:
  ResolventSimulator(const SecondKindResolvent& resolvent, const VouParams& params, std::size_t n, double horizon,
                     SimulationOptions options = {});
  SamplePath simulate(std::uint64_t seed) const;
  const std::vector<double>& mean() const noexcept { return mean_; }
  const std::vector<double>& weights() const noexcept { return w_; }

 private:
  VouParams params_;
  std::size_t n_;
  double dt_;
  SimulationOptions options_;
  std::vector<double> mean_;
  std::vector<double> w_;
};

SamplePath simulate_resolvent(const SecondKindResolvent& resolvent, const VouParams& params, std::size_t n,
                              double horizon, std::uint64_t seed, SimulationOptions options = {});

// Exact Gaussian sampling at t_1..t_n from
//   cov(X_t, X_s) = sigma^2 int_0^{min(s,t)} E(|t - s| + r) E(r) dr
// with a dense Cholesky factor.
class CholeskySampler {
 public:
  static constexpr std::size_t kMaxSteps = 2000;

  CholeskySampler(const SecondKindResolvent& resolvent, const VouParams& params, std::size_t n, double horizon,
                  SimulationOptions options = {});
  SamplePath simulate(std::uint64_t seed) const;
  const Eigen::MatrixXd& covariance() const noexcept { return cov_; }
  const Eigen::VectorXd& mean() const noexcept { return mean_; }
  double jitter() const noexcept { return jitter_; }

 private:
  VouParams params_;
  std::size_t n_;
  double dt_;
  SimulationOptions options_;
  Eigen::VectorXd mean_;
  Eigen::MatrixXd cov_;
  Eigen::MatrixXd factor_;
  double jitter_ = 0.0;
};

SamplePath simulate_exact_cholesky(const SecondKindResolvent& resolvent, const VouParams& params, std::size_t n,
                                   double horizon, std::uint64_t seed, SimulationOptions options = {});

// X_t = m1 + sigma int_{-T_b}^t E(t - s) dW_s, discretized like the resolvent scheme.
// burn_in < 0 selects T_b automatically: 50/|beta| for exp-sum kernels, otherwise the
// smallest grid multiple with int_{T_b}^inf E^2 <= 1e-6 int_0^inf E^2.
class StationarySimulator {
 public:
  StationarySimulator(const SecondKindResolvent& resolvent, const VouParams& params, std::size_t n, double horizon,
                      double burn_in = -1.0, SimulationOptions options = {});
  SamplePath simulate(std::uint64_t seed) const;
  double burn_in() const noexcept { return burn_in_; }
  double stationary_mean() const noexcept { return m1_; }
  const std::string& warning() const noexcept { return warning_; }

 private:
  VouParams params_;
  std::size_t n_;
  std::size_t burn_steps_;
  double dt_;
  double burn_in_;
  double m1_;
  SimulationOptions options_;
  std::vector<double> w_;
  std::string warning_;
};

SamplePath simulate_stationary(const SecondKindResolvent& resolvent, const VouParams& params, std::size_t n,
                               double horizon, double burn_in, std::uint64_t seed, SimulationOptions options = {});

// Relative tail of int E^2 beyond t, using the grid and the fitted tail model.
double square_tail_fraction(const SecondKindResolvent& resolvent, double t);

}  // namespace vou
