#include "vou/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "vou/error.hpp"
#include "vou/grid.hpp"

namespace vou {

namespace {

constexpr double kDegenerate = 1e-12;

struct Sums {
  double s1 = 0.0;   // sum X_u (v - u)
  double s2 = 0.0;   // sum X_u^2 (v - u)
  double xdz = 0.0;  // sum X_u (Z_v - Z_u)
  double max_sq = 0.0;
};

Sums sums(const EstimationInput& in) {
  if (in.n == 0 || in.x.size() != in.n + 1 || in.z_fine.size() != in.n + 1) {
    throw UsageError("estimation input has inconsistent sizes");
  }
  const double dt = in.grid_step();
  Sums s;
  for (std::size_t k = 0; k < in.n; ++k) {
    const double x = in.x[k];
    s.s1 += x * dt;
    s.s2 += x * x * dt;
    s.xdz += x * (in.z_fine[k + 1] - in.z_fine[k]);
    s.max_sq = std::max(s.max_sq, x * x);
  }
  return s;
}

DriftEstimate base(const EstimationInput& in, EstimatorMethod method) {
  DriftEstimate e;
  e.method = method;
  e.horizon = in.horizon;
  e.n = in.n;
  e.m = in.m;
  return e;
}

}  // namespace

std::string to_string(EstimatorMethod method) {
  switch (method) {
    case EstimatorMethod::MLE:
      return "mle";
    case EstimatorMethod::MLEKnownB:
      return "mle_known_b";
    case EstimatorMethod::MLEKnownBeta:
      return "mle_known_beta";
    case EstimatorMethod::MoM:
      return "mom";
  }
  return "unknown";
}

EstimatorMethod estimator_from_string(const std::string& name) {
  if (name == "mle") return EstimatorMethod::MLE;
  if (name == "mle_known_b") return EstimatorMethod::MLEKnownB;
  if (name == "mle_known_beta") return EstimatorMethod::MLEKnownBeta;
  if (name == "mom") return EstimatorMethod::MoM;
  throw DomainError("unknown estimator '" + name + "'");
}

PartitionPlan plan_partition(const KernelSpec& kernel, double horizon, double gamma, const PlanPolicy& policy) {
  if (!(horizon > 0.0)) throw DomainError("planning horizon must be positive");
  if (!(gamma > 0.0 && gamma <= 1.0)) throw DomainError("gamma must lie in (0, 1]");
  if (!(policy.threshold > 0.0)) {
    throw PlanningError("threshold must be positive: both conditions are limits that vanish only as n -> inf");
  }
  PartitionPlan plan;
  plan.horizon = horizon;
  plan.gamma = gamma;
  plan.alpha = kernel.alpha();
  plan.threshold = policy.threshold;
  if (policy.n) {
    plan.n = *policy.n;
  } else if (policy.eta) {
    plan.n = static_cast<std::size_t>(std::ceil(std::pow(horizon, 1.0 + *policy.eta) - 1e-9));
  } else {
    throw DomainError("plan policy needs n or eta");
  }
  if (plan.n == 0) throw DomainError("plan needs n >= 1");
  plan.mesh = horizon / static_cast<double>(plan.n);

  const FirstKindResolvent L = first_kind_resolvent(kernel, plan.mesh, horizon);
  plan.first_kind_mass = L.cumulative(L.steps());

  const double root_t = std::sqrt(horizon);
  plan.condition_coarse = root_t * std::pow(plan.mesh, gamma);
  plan.coarse_ok = plan.condition_coarse < policy.threshold;

  const double scale = static_cast<double>(plan.n) * plan.first_kind_mass / root_t;
  auto fine_condition = [&](double m) { return scale * std::pow(horizon / m, gamma); };

  std::size_t r = 1;
  if (!(fine_condition(static_cast<double>(plan.n)) < policy.threshold)) {
    // m > T (scale / threshold)^(1/gamma), in logs to avoid overflow.
    const double log_m = std::log(horizon) + std::log(scale / policy.threshold) / gamma;
    const double log_r = log_m - std::log(static_cast<double>(plan.n));
    if (log_m > std::log(static_cast<double>(policy.max_m))) {
      std::ostringstream os;
      os << "fine-grid condition needs m > exp(" << log_m << ") = " << std::exp(log_m) << " > cap " << policy.max_m
         << " (n = " << plan.n << ", L((0,T]) = " << plan.first_kind_mass << ", coarse condition "
         << plan.condition_coarse << ")";
      throw PlanningError(os.str());
    }
    r = static_cast<std::size_t>(std::floor(std::exp(log_r))) + 1;
    while (r > 1 && fine_condition(static_cast<double>((r - 1) * plan.n)) < policy.threshold) --r;
    while (!(fine_condition(static_cast<double>(r * plan.n)) < policy.threshold)) ++r;
  }
  plan.m = r * plan.n;
  if (plan.m > policy.max_m) throw PlanningError("fine grid exceeds the cap");
  plan.condition_fine = fine_condition(static_cast<double>(plan.m));
  plan.fine_ok = plan.condition_fine < policy.threshold;
  if (!plan.coarse_ok) {
    std::ostringstream os;
    os << "coarse condition sqrt(T)|P_n|^gamma = " << plan.condition_coarse << " is not below " << policy.threshold;
    plan.diagnostic = os.str();
  }
  return plan;
}

EstimationInput prepare_estimation(const PathOnGrid& fine_path, const FirstKindResolvent& fine_resolvent,
                                   std::size_t stride) {
  EstimationInput in;
  in.z_fine = z_on_fine_grid(fine_path, fine_resolvent, stride);
  const std::size_t m = fine_path.steps();
  in.n = m / stride;
  in.m = m;
  in.horizon = fine_path.horizon();
  in.x.resize(in.n + 1);
  for (std::size_t k = 0; k <= in.n; ++k) in.x[k] = fine_path.values[k * stride];

  const FirstKindResolvent coarse = coarsen(fine_resolvent, stride);
  const double x0 = fine_path.x0;
  double z = coarse.atom > 0.0 ? coarse.atom * (in.x[in.n] - x0) : 0.0;
  for (std::size_t j = 1; j <= in.n; ++j) z += (in.x[in.n - j + 1] - x0) * coarse.interval_masses[j - 1];
  in.z_coarse_terminal = z;
  return in;
}

DriftEstimate mle_discrete(const EstimationInput& in, MleOptions options) {
  const Sums s = sums(in);
  const double t = in.horizon;
  const double f = t * s.s2 - s.s1 * s.s1;
  if (!(f > kDegenerate * t * s.s2) || !(s.s2 > 0.0)) {
    throw DegenerateError("MLE denominator F_T vanishes (constant path)");
  }
  const double zt = options.fine_terminal ? in.z_fine[in.n] : in.z_coarse_terminal;
  DriftEstimate e = base(in, EstimatorMethod::MLE);
  e.f_denominator = f;
  e.b_hat = (zt * s.s2 - s.s1 * s.xdz) / f;
  e.beta_hat = (t * s.xdz - s.s1 * zt) / f;
  return e;
}

DriftEstimate mle_known_beta(const EstimationInput& in, double beta, MleOptions options) {
  const Sums s = sums(in);
  const double t = in.horizon;
  const double zt = options.fine_terminal ? in.z_fine[in.n] : in.z_coarse_terminal;
  DriftEstimate e = base(in, EstimatorMethod::MLEKnownBeta);
  e.beta_hat = beta;
  e.b_hat = zt / t - beta / t * s.s1;
  e.f_denominator = t;
  return e;
}

DriftEstimate mle_known_b(const EstimationInput& in, double b) {
  const Sums s = sums(in);
  if (!(s.s2 > kDegenerate * in.horizon * s.max_sq) || !(s.s2 > 0.0)) {
    throw DegenerateError("known-b MLE denominator sum X^2 dt vanishes");
  }
  DriftEstimate e = base(in, EstimatorMethod::MLEKnownB);
  e.b_hat = b;
  e.beta_hat = (s.xdz - b * s.s1) / s.s2;
  e.f_denominator = s.s2;
  return e;
}

TimeAverages time_averages(const std::vector<double>& x) {
  if (x.size() < 2) throw UsageError("time averages need at least two samples");
  TimeAverages a;
  const std::size_t n = x.size() - 1;
  for (std::size_t k = 0; k < n; ++k) {
    a.m1 += x[k];
    a.m2 += x[k] * x[k];
  }
  a.m1 /= static_cast<double>(n);
  a.m2 /= static_cast<double>(n);
  return a;
}

DriftEstimate method_of_moments(const std::vector<double>& x, double dt, double alpha, double sigma) {
  if (!(alpha > 0.5 && alpha <= 1.0)) throw DomainError("method of moments needs alpha in (1/2, 1]");
  if (!(sigma > 0.0)) throw DomainError("method of moments needs sigma > 0");
  const TimeAverages a = time_averages(x);
  const double central = a.m2 - a.m1 * a.m1;
  if (!(central > kDegenerate * a.m2)) throw DegenerateError("empirical variance m2 - m1^2 is not positive");
  const double power = std::pow(c_alpha(alpha) * sigma * sigma / central, alpha / (2.0 * alpha - 1.0));
  DriftEstimate e;
  e.method = EstimatorMethod::MoM;
  e.horizon = dt * static_cast<double>(x.size() - 1);
  e.n = x.size() - 1;
  e.m = e.n;
  e.b_hat = a.m1 * power;
  e.beta_hat = -power;
  e.f_denominator = central;
  return e;
}

double mom_error_predictor(double alpha, double m1, double m2, double delta) {
  const double central = m2 - m1 * m1;
  if (!(central > 0.0)) throw DomainError("predictor needs m2 > m1^2");
  return alpha / (2.0 * alpha - 1.0) * delta / central;
}

double log_likelihood(double b, double beta, const EstimationInput& in, double sigma) {
  if (!(sigma > 0.0)) throw DomainError("log-likelihood needs sigma > 0");
  if (in.x.size() != in.n + 1 || in.z_fine.size() != in.n + 1) throw UsageError("inconsistent estimation input");
  const double dt = in.grid_step();
  double a = 0.0, q = 0.0;
  for (std::size_t k = 0; k < in.n; ++k) {
    const double drift = b + beta * in.x[k];
    a += drift * (in.z_fine[k + 1] - in.z_fine[k]);
    q += drift * drift * dt;
  }
  return (a - 0.5 * q) / (sigma * sigma);
}

std::array<double, 4> sqrt_spd_2x2(const std::array<double, 4>& a) {
  const double det = a[0] * a[3] - a[1] * a[2];
  if (!(det > 0.0) || !(a[0] > 0.0)) throw DomainError("matrix is not positive definite");
  const double s = std::sqrt(det);
  const double t = std::sqrt(a[0] + a[3] + 2.0 * s);
  return {(a[0] + s) / t, a[1] / t, a[2] / t, (a[3] + s) / t};
}

FisherInformation fisher_information(const StationaryMoments& moments, double sigma) {
  if (!(moments.m_var > 0.0)) throw DomainError("Fisher information needs m_var > 0");
  FisherInformation f;
  f.matrix = {1.0, moments.m1, moments.m1, moments.m2};
  f.determinant = moments.m_var;
  const double c = sigma * sigma / f.determinant;
  f.asymptotic_covariance = {c * moments.m2, -c * moments.m1, -c * moments.m1, c};
  f.sqrt_matrix = sqrt_spd_2x2(f.matrix);
  return f;
}

}  // namespace vou
