#include "vou/simulator.hpp"

#include <algorithm>
#include <cmath>

#include "vou/error.hpp"
#include "vou/grid.hpp"
#include "vou/moments.hpp"
#include "vou/quadrature.hpp"
#include "vou/rng.hpp"

namespace vou {

namespace {

constexpr double kBurnInTolerance = 1e-6;

double checked_step(std::size_t n, double horizon) {
  if (n < 2) throw DomainError("simulation needs n >= 2 steps");
  if (!(horizon > 0.0) || !std::isfinite(horizon)) throw DomainError("simulation horizon must be positive");
  return horizon / static_cast<double>(n);
}

// w_m = sqrt(mean of E^2 over coarse cell m), m = 1..count; cells past the resolvent use the tail model.
std::vector<double> noise_weights(const SecondKindResolvent& res, double dt, std::size_t count, bool* used_tail) {
  const std::size_t r = nesting_factor(res.grid_step(), dt);
  const auto& sq = res.square_cells();
  const std::size_t fine = res.steps();
  std::vector<double> w(count + 1, 0.0);
  for (std::size_t m = 1; m <= count; ++m) {
    double s = 0.0;
    if (m * r <= fine) {
      for (std::size_t j = (m - 1) * r + 1; j <= m * r; ++j) s += sq[j];
      s /= dt;
    } else {
      if (used_tail) *used_tail = true;
      if (res.tail().kind != TailModel::Kind::None) {
        s = integrate_cell(
                [&](double t) {
                  const double e = res.tail().value(t);
                  return e * e;
                },
                (m - 1) * dt, m * dt) /
            dt;
      }
    }
    w[m] = std::sqrt(s);
  }
  return w;
}

}  // namespace

std::string to_string(Scheme scheme) {
  switch (scheme) {
    case Scheme::Euler:
      return "euler";
    case Scheme::EulerProduct:
      return "euler_product";
    case Scheme::Resolvent:
      return "resolvent";
    case Scheme::ExactCholesky:
      return "cholesky";
    case Scheme::Stationary:
      return "stationary";
  }
  return "unknown";
}

Scheme scheme_from_string(const std::string& name) {
  if (name == "euler") return Scheme::Euler;
  if (name == "euler_product") return Scheme::EulerProduct;
  if (name == "resolvent") return Scheme::Resolvent;
  if (name == "cholesky" || name == "exact_cholesky") return Scheme::ExactCholesky;
  if (name == "stationary") return Scheme::Stationary;
  throw DomainError("unknown scheme '" + name + "'");
}

void VouParams::validate(bool allow_zero_sigma) const {
  if (!std::isfinite(b) || !std::isfinite(x0)) throw DomainError("b and x0 must be finite");
  if (!(beta < 0.0)) throw DomainError("beta must be negative");
  if (sigma < 0.0 || !std::isfinite(sigma)) throw DomainError("sigma must be non-negative");
  if (sigma == 0.0 && !allow_zero_sigma) throw DomainError("sigma = 0 is only allowed in test mode");
}

EulerSimulator::EulerSimulator(const KernelSpec& kernel, const VouParams& params, std::size_t n, double horizon,
                               SimulationOptions options)
    : params_(params), n_(n), dt_(checked_step(n, horizon)), options_(options) {
  params.validate(options.allow_zero_sigma);
  kv_ = kernel_weights(kernel, dt_, n, options.euler_rule);
}

SamplePath EulerSimulator::simulate(std::uint64_t seed) const {
  SamplePath p;
  p.grid_step = dt_;
  p.x0 = params_.x0;
  p.seed = seed;
  p.scheme = options_.euler_rule == ResolventRule::PointValues ? Scheme::Euler : Scheme::EulerProduct;
  std::vector<double> xi(n_);
  NormalStream(seed).fill(xi);
  std::vector<double> d(n_, 0.0);
  p.values.assign(n_ + 1, 0.0);
  p.values[0] = params_.x0;
  const double sq = params_.sigma * std::sqrt(dt_);
  for (std::size_t k = 0; k < n_; ++k) {
    d[k] = dt_ * (params_.b + params_.beta * p.values[k]) + sq * xi[k];
    double s = params_.x0;
    for (std::size_t i = 0; i <= k; ++i) s += kv_[k + 1 - i] * d[i];
    p.values[k + 1] = s;
  }
  if (options_.retain_noise) p.noise = std::move(xi);
  return p;
}

SamplePath simulate_euler(const KernelSpec& kernel, const VouParams& params, std::size_t n, double horizon,
                          std::uint64_t seed, SimulationOptions options) {
  return EulerSimulator(kernel, params, n, horizon, options).simulate(seed);
}

ResolventSimulator::ResolventSimulator(const SecondKindResolvent& res, const VouParams& params, std::size_t n,
                                       double horizon, SimulationOptions options)
    : params_(params), n_(n), dt_(checked_step(n, horizon)), options_(options) {
  params.validate(options.allow_zero_sigma);
  if (res.beta() != params.beta) throw UsageError("resolvent beta differs from the path parameters");
  const std::size_t r = nesting_factor(res.grid_step(), dt_);
  if (res.steps() < n * r) throw UsageError("resolvent horizon is shorter than the path");
  mean_.assign(n + 1, params.x0);
  const auto& eps = res.cumulative_integral();
  for (std::size_t k = 1; k <= n; ++k) {
    const double e = eps[k * r];
    mean_[k] = (1.0 + params.beta * e) * params.x0 + e * params.b;
  }
  w_ = noise_weights(res, dt_, n, nullptr);
}

SamplePath ResolventSimulator::simulate(std::uint64_t seed) const {
  SamplePath p;
  p.grid_step = dt_;
  p.x0 = params_.x0;
  p.seed = seed;
  p.scheme = Scheme::Resolvent;
  std::vector<double> xi(n_);
  NormalStream(seed).fill(xi);
  p.values = mean_;
  const double sq = params_.sigma * std::sqrt(dt_);
  for (std::size_t k = 1; k <= n_; ++k) {
    double s = 0.0;
    for (std::size_t i = 1; i <= k; ++i) s += w_[k - i + 1] * xi[i - 1];
    p.values[k] += sq * s;
  }
  if (options_.retain_noise) p.noise = std::move(xi);
  return p;
}

SamplePath simulate_resolvent(const SecondKindResolvent& resolvent, const VouParams& params, std::size_t n,
                              double horizon, std::uint64_t seed, SimulationOptions options) {
  return ResolventSimulator(resolvent, params, n, horizon, options).simulate(seed);
}

CholeskySampler::CholeskySampler(const SecondKindResolvent& res, const VouParams& params, std::size_t n,
                                 double horizon, SimulationOptions options)
    : params_(params), n_(n), dt_(checked_step(n, horizon)), options_(options) {
  params.validate(options.allow_zero_sigma);
  if (n > kMaxSteps) throw UsageError("exact Cholesky sampling is limited to n <= 2000");
  if (res.beta() != params.beta) throw UsageError("resolvent beta differs from the path parameters");
  if (res.horizon() < horizon * (1.0 - 1e-12)) throw UsageError("resolvent horizon is shorter than the path");

  const auto& rule = gauss_legendre_16();
  constexpr std::size_t Q = GaussRule::kPoints;
  const double dt = dt_;
  // E at Gauss nodes of every cell (cells 1..n).
  std::vector<double> nodes((n + 1) * Q, 0.0);
  for (std::size_t m = 1; m <= n; ++m) {
    for (std::size_t q = 0; q < Q; ++q) nodes[m * Q + q] = res((m - 1 + rule.nodes[q]) * dt);
  }
  // First cell r in (0, dt] through r = dt w^p, which absorbs the singularity of E(r).
  const double p1 = res.kernel().zero_cell_power(1);
  std::vector<double> r1(Q), w1(Q), e1(Q);
  for (std::size_t q = 0; q < Q; ++q) {
    const double w = rule.nodes[q];
    r1[q] = dt * std::pow(w, p1);
    w1[q] = rule.weights[q] * dt * p1 * std::pow(w, p1 - 1.0);
    e1[q] = res(r1[q]);
  }
  const double first_square = res.square_cells()[1] * (res.grid_step() == dt ? 1.0 : 0.0);
  double zero_cell = first_square;
  if (res.grid_step() != dt) {
    zero_cell = integrate_from_zero(
        [&](double r) {
          const double e = res(r);
          return e * e;
        },
        dt, res.kernel().zero_cell_power(2));
  }

  const double s2 = params.sigma * params.sigma;
  cov_.setZero(n, n);
  for (std::size_t d = 0; d < n; ++d) {
    double acc = 0.0;
    for (std::size_t k = 1; k + d <= n; ++k) {
      double cell = 0.0;
      if (k == 1) {
        if (d == 0) {
          cell = zero_cell;
        } else {
          for (std::size_t q = 0; q < Q; ++q) cell += w1[q] * res(d * dt + r1[q]) * e1[q];
        }
      } else {
        const double* a = &nodes[(k + d) * Q];
        const double* b = &nodes[k * Q];
        for (std::size_t q = 0; q < Q; ++q) cell += rule.weights[q] * a[q] * b[q];
        cell *= dt;
      }
      acc += cell;
      // Row k + d, column k (1-based grid indices).
      cov_(k + d - 1, k - 1) = s2 * acc;
      cov_(k - 1, k + d - 1) = s2 * acc;
    }
  }

  mean_.resize(n);
  for (std::size_t k = 1; k <= n; ++k) {
    const double e = res.integral_to(k * dt);
    mean_(k - 1) = (1.0 + params.beta * e) * params.x0 + e * params.b;
  }

  Eigen::LLT<Eigen::MatrixXd> llt(cov_);
  if (llt.info() != Eigen::Success) {
    jitter_ = 1e-10;
    Eigen::MatrixXd c = cov_;
    c.diagonal().array() += jitter_;
    llt.compute(c);
    if (llt.info() != Eigen::Success) throw NumericalError("covariance matrix is not positive definite");
  }
  factor_ = llt.matrixL();
}

SamplePath CholeskySampler::simulate(std::uint64_t seed) const {
  SamplePath p;
  p.grid_step = dt_;
  p.x0 = params_.x0;
  p.seed = seed;
  p.scheme = Scheme::ExactCholesky;
  Eigen::VectorXd xi(n_);
  NormalStream rng(seed);
  for (std::size_t i = 0; i < n_; ++i) xi(i) = rng();
  const Eigen::VectorXd x = mean_ + factor_.triangularView<Eigen::Lower>() * xi;
  p.values.assign(n_ + 1, params_.x0);
  for (std::size_t k = 1; k <= n_; ++k) p.values[k] = x(k - 1);
  if (options_.retain_noise) p.noise.assign(xi.data(), xi.data() + n_);
  return p;
}

SamplePath simulate_exact_cholesky(const SecondKindResolvent& resolvent, const VouParams& params, std::size_t n,
                                   double horizon, std::uint64_t seed, SimulationOptions options) {
  return CholeskySampler(resolvent, params, n, horizon, options).simulate(seed);
}

double square_tail_fraction(const SecondKindResolvent& res, double t) {
  const auto& sq = res.square_cells();
  const TailModel& tail = res.tail();
  double total = tail.square_integral_from(res.horizon());
  for (double c : sq) total += c;
  double beyond;
  if (t >= res.horizon()) {
    beyond = tail.square_integral_from(t);
  } else {
    const auto k0 = static_cast<std::size_t>(std::ceil(t / res.grid_step() - 1e-9));
    beyond = tail.square_integral_from(res.horizon());
    for (std::size_t k = k0 + 1; k < sq.size(); ++k) beyond += sq[k];
  }
  return beyond / total;
}

StationarySimulator::StationarySimulator(const SecondKindResolvent& res, const VouParams& params, std::size_t n,
                                         double horizon, double burn_in, SimulationOptions options)
    : params_(params), n_(n), dt_(checked_step(n, horizon)), options_(options) {
  params.validate(options.allow_zero_sigma);
  if (res.beta() != params.beta) throw UsageError("resolvent beta differs from the path parameters");
  nesting_factor(res.grid_step(), dt_);
  const KernelSpec& kernel = res.kernel();
  m1_ = vou::stationary_mean(kernel, params.b, params.beta, params.x0);

  if (burn_in < 0.0) {
    if (kernel.kind() == KernelKind::ExpSum) {
      burn_in = 50.0 / std::abs(params.beta);
    } else {
      // Smallest grid multiple meeting the tail criterion, searched on the grid, then through the tail model.
      burn_in = -1.0;
      for (std::size_t k = 1; k * dt_ <= res.horizon() * (1.0 + 1e-12); ++k) {
        if (square_tail_fraction(res, k * dt_) <= kBurnInTolerance) {
          burn_in = k * dt_;
          break;
        }
      }
      if (burn_in < 0.0) {
        const TailModel& tail = res.tail();
        double t = res.horizon();
        while (tail.kind != TailModel::Kind::None && square_tail_fraction(res, t) > kBurnInTolerance && t < 1e7) {
          t *= 1.25;
        }
        burn_in = t;
      }
    }
  }
  burn_steps_ = static_cast<std::size_t>(std::ceil(burn_in / dt_ - 1e-9));
  burn_in_ = burn_steps_ * dt_;
  if (square_tail_fraction(res, burn_in_) > kBurnInTolerance) {
    warning_ = "burn-in " + std::to_string(burn_in_) + " leaves more than 1e-6 of int E^2 in the tail";
  }
  bool used_tail = false;
  w_ = noise_weights(res, dt_, n + burn_steps_, &used_tail);
  if (used_tail) {
    if (!warning_.empty()) warning_ += "; ";
    warning_ += "resolvent horizon " + std::to_string(res.horizon()) + " is shorter than burn-in plus path; " +
                "tail model used for the remaining weights";
  }
}

SamplePath StationarySimulator::simulate(std::uint64_t seed) const {
  SamplePath p;
  p.grid_step = dt_;
  p.seed = seed;
  p.scheme = Scheme::Stationary;
  p.warning = warning_;
  const std::size_t total = n_ + burn_steps_;
  std::vector<double> xi(total);
  NormalStream(seed).fill(xi);
  p.values.assign(n_ + 1, m1_);
  const double sq = params_.sigma * std::sqrt(dt_);
  for (std::size_t k = 0; k <= n_; ++k) {
    const std::size_t last = k + burn_steps_;
    double s = 0.0;
    for (std::size_t i = 1; i <= last; ++i) s += w_[last - i + 1] * xi[i - 1];
    p.values[k] += sq * s;
  }
  p.x0 = p.values[0];
  if (options_.retain_noise) p.noise = std::move(xi);
  return p;
}

SamplePath simulate_stationary(const SecondKindResolvent& resolvent, const VouParams& params, std::size_t n,
                               double horizon, double burn_in, std::uint64_t seed, SimulationOptions options) {
  return StationarySimulator(resolvent, params, n, horizon, burn_in, options).simulate(seed);
}

}  // namespace vou
