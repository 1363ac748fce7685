#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "vou/first_kind.hpp"
#include "vou/kernel.hpp"
#include "vou/moments.hpp"
#include "vou/transforms.hpp"

namespace vou {

enum class EstimatorMethod { MLE, MLEKnownB, MLEKnownBeta, MoM };

std::string to_string(EstimatorMethod method);
EstimatorMethod estimator_from_string(const std::string& name);

struct PartitionPlan {
  std::size_t n = 0;  // coarse cells
  std::size_t m = 0;  // fine cells, a multiple of n
  double horizon = 0.0;
  double mesh = 0.0;  // T / n
  double gamma = 0.0;
  double alpha = 0.0;
  double threshold = 0.1;
  double first_kind_mass = 0.0;  // L((0, T])
  double condition_coarse = 0.0;  // sqrt(T) (T/n)^gamma
  double condition_fine = 0.0;    // n L((0,T]) / sqrt(T) (T/m)^gamma
  bool coarse_ok = false;
  bool fine_ok = false;
  std::string diagnostic;

  std::size_t stride() const noexcept { return n == 0 ? 0 : m / n; }
};

struct PlanPolicy {
  std::optional<std::size_t> n;  // coarse cell count
  std::optional<double> eta;     // alternatively |P_n| = T^(-eta)
  double threshold = 0.1;
  std::size_t max_m = 100000000;
};

// Smallest nested m = r n with condition_fine < threshold. PlanningError when no
// m <= max_m works or the threshold is not positive. condition_coarse does not
// depend on m and is reported through coarse_ok.
PartitionPlan plan_partition(const KernelSpec& kernel, double horizon, double gamma, const PlanPolicy& policy);

// Discretized observation used by every estimator: X on the coarse grid and the
// Z values at coarse points.
struct EstimationInput {
  std::vector<double> x;       // X at coarse points t_0..t_n
  std::vector<double> z_fine;  // Z^{P_m} at coarse points
  double z_coarse_terminal = 0.0;  // Z^{P_n}_{t_n}
  double horizon = 0.0;
  std::size_t n = 0;
  std::size_t m = 0;

  double grid_step() const { return horizon / static_cast<double>(n); }
};

// Builds the input from a path on the fine grid (same grid as `fine_resolvent`),
// observed at every `stride`-th point.
EstimationInput prepare_estimation(const PathOnGrid& fine_path, const FirstKindResolvent& fine_resolvent,
                                   std::size_t stride);

struct DriftEstimate {
  double b_hat = 0.0;
  double beta_hat = 0.0;
  EstimatorMethod method = EstimatorMethod::MLE;
  double horizon = 0.0;
  std::size_t n = 0;
  std::size_t m = 0;
  double f_denominator = 0.0;
};

struct MleOptions {
  // Use Z^{P_m} for the terminal value as well.
  bool fine_terminal = false;
};

DriftEstimate mle_discrete(const EstimationInput& in, MleOptions options = {});
DriftEstimate mle_known_beta(const EstimationInput& in, double beta, MleOptions options = {});
DriftEstimate mle_known_b(const EstimationInput& in, double b);

// Time averages m1(T), m2(T) (left endpoint) and the fractional-kernel inversion.
struct TimeAverages {
  double m1 = 0.0;
  double m2 = 0.0;
};
TimeAverages time_averages(const std::vector<double>& x);
DriftEstimate method_of_moments(const std::vector<double>& x, double dt, double alpha, double sigma);

// (alpha / (2 alpha - 1)) delta / (m2 - m1^2).
double mom_error_predictor(double alpha, double m1, double m2, double delta);

// l_T(b, beta) = sigma^-2 [sum (b + beta X_u)(Z_v - Z_u) - 1/2 sum (b + beta X_u)^2 (v - u)].
double log_likelihood(double b, double beta, const EstimationInput& in, double sigma);

struct FisherInformation {
  std::array<double, 4> matrix{};  // row-major [[1, m1], [m1, m2]]
  double determinant = 0.0;
  std::array<double, 4> asymptotic_covariance{};  // sigma^2 I^-1
  std::array<double, 4> sqrt_matrix{};            // I^(1/2)
};

FisherInformation fisher_information(const StationaryMoments& moments, double sigma);

// Symmetric square root of a 2x2 symmetric positive definite matrix.
std::array<double, 4> sqrt_spd_2x2(const std::array<double, 4>& a);

}  // namespace vou
