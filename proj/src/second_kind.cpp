#include "vou/second_kind.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "vou/error.hpp"
#include "vou/grid.hpp"
#include "vou/quadrature.hpp"

namespace vou {

namespace {

// Least-squares slope and intercept of y on x.
std::pair<double, double> fit_line(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  return {slope, (sy - slope * sx) / n};
}

TailModel fit_tail(const KernelSpec& kernel, const std::vector<double>& e, double dt) {
  TailModel m;
  const std::size_t n = e.size() - 1;
  if (n < 20) return m;
  const bool power = kernel.has_power_tail();
  const std::size_t first = power ? std::max<std::size_t>(1, n / 10) : n / 2;
  constexpr std::size_t kSamples = 200;
  std::vector<double> xs, ys;
  for (std::size_t s = 0; s < kSamples; ++s) {
    std::size_t k;
    if (power) {
      k = static_cast<std::size_t>(std::round(first * std::pow(static_cast<double>(n) / first, s / (kSamples - 1.0))));
    } else {
      k = first + (n - first) * s / (kSamples - 1);
    }
    k = std::clamp<std::size_t>(k, 1, n);
    if (!(e[k] > 0.0)) return m;
    const double t = k * dt;
    xs.push_back(power ? std::log(t) : t);
    ys.push_back(std::log(e[k]));
  }
  const auto [slope, intercept] = fit_line(xs, ys);
  if (power) {
    if (!(slope < -1.0)) return m;
    m.kind = TailModel::Kind::Power;
    m.exponent = -slope;
  } else {
    if (!(slope < 0.0)) return m;
    m.kind = TailModel::Kind::Exponential;
    m.exponent = -slope;
  }
  m.amplitude = std::exp(intercept);
  return m;
}

}  // namespace

double TailModel::value(double t) const {
  switch (kind) {
    case Kind::Power:
      return amplitude * std::pow(t, -exponent);
    case Kind::Exponential:
      return amplitude * std::exp(-exponent * t);
    case Kind::None:
      break;
  }
  throw NumericalError("no tail model available beyond the resolvent horizon");
}

double TailModel::integral_from(double t) const {
  switch (kind) {
    case Kind::Power:
      return amplitude * std::pow(t, 1.0 - exponent) / (exponent - 1.0);
    case Kind::Exponential:
      return amplitude * std::exp(-exponent * t) / exponent;
    case Kind::None:
      break;
  }
  return 0.0;
}

double TailModel::square_integral_from(double t) const {
  switch (kind) {
    case Kind::Power:
      return amplitude * amplitude * std::pow(t, 1.0 - 2.0 * exponent) / (2.0 * exponent - 1.0);
    case Kind::Exponential:
      return amplitude * amplitude * std::exp(-2.0 * exponent * t) / (2.0 * exponent);
    case Kind::None:
      break;
  }
  return 0.0;
}

std::string TailModel::describe() const {
  std::ostringstream os;
  os.precision(6);
  switch (kind) {
    case Kind::Power:
      os << "power: " << amplitude << " * t^-" << exponent;
      break;
    case Kind::Exponential:
      os << "exponential: " << amplitude << " * exp(-" << exponent << " t)";
      break;
    case Kind::None:
      os << "none";
      break;
  }
  return os.str();
}

SecondKindResolvent::SecondKindResolvent(const KernelSpec& kernel, double beta, double dt, double horizon)
    : kernel_(kernel), beta_(beta), dt_(dt) {
  if (!(beta < 0.0)) throw DomainError("second-kind resolvent requires beta < 0");
  const std::size_t n = step_count(horizon, dt);

  cell_a_.assign(n + 2, 0.0);
  cell_b_.assign(n + 2, 0.0);
  for (std::size_t m = 1; m <= n + 1; ++m) {
    const double lo = (m - 1) * dt;
    const double hi = m * dt;
    const double mid = 0.5 * (lo + hi);
    const double i0 = kernel.integral(lo, hi);
    double centred;
    if (m == 1) {
      centred = kernel.first_moment(lo, hi) - mid * i0;
    } else {
      centred = integrate_cell([&](double u) { return (u - mid) * kernel.value(u); }, lo, hi);
    }
    cell_a_[m] = 0.5 * i0 + centred / dt;
    cell_b_[m] = 0.5 * i0 - centred / dt;
  }

  kk_.assign(n + 1, 0.0);
  for (std::size_t k = 1; k <= n; ++k) kk_[k] = kernel.self_convolution(k * dt);

  conv_.assign(n + 1, 0.0);
  const double denom = 1.0 - beta * cell_b_[1];
  for (std::size_t k = 1; k <= n; ++k) {
    double s = 0.0;
    for (std::size_t i = 1; i < k; ++i) s += conv_[i] * (cell_b_[k - i + 1] + cell_a_[k - i]);
    conv_[k] = (kk_[k] + beta * s) / denom;
  }

  values_.assign(n + 1, 0.0);
  values_[0] = kernel.k_zero_plus();
  for (std::size_t k = 1; k <= n; ++k) values_[k] = kernel.value(k * dt) + beta * conv_[k];

  integral_.assign(n + 1, 0.0);
  for (std::size_t k = 1; k <= n; ++k) {
    integral_[k] = integral_[k - 1] + kernel.integral((k - 1) * dt, k * dt) +
                   beta * 0.5 * dt * (conv_[k - 1] + conv_[k]);
  }

  square_cells_.assign(n + 1, 0.0);
  {
    const double slope = conv_[1] / dt;
    const double k2 = integrate_from_zero(
        [&](double u) {
          const double v = kernel.value(u);
          return v * v;
        },
        dt, kernel.zero_cell_power(2));
    square_cells_[1] = k2 + 2.0 * beta * slope * kernel.first_moment(0.0, dt) +
                       beta * beta * slope * slope * dt * dt * dt / 3.0;
  }
  for (std::size_t k = 2; k <= n; ++k) {
    const double lo = (k - 1) * dt;
    const double f0 = conv_[k - 1];
    const double df = (conv_[k] - conv_[k - 1]) / dt;
    square_cells_[k] = integrate_cell(
        [&](double u) {
          const double e = kernel.value(u) + beta * (f0 + df * (u - lo));
          return e * e;
        },
        lo, k * dt);
  }

  tail_ = fit_tail(kernel, values_, dt);
}

double SecondKindResolvent::operator()(double t) const {
  if (!(t > 0.0)) throw DomainError("resolvent evaluated at t <= 0");
  const std::size_t n = steps();
  if (t > horizon() * (1.0 + 1e-12)) return tail_.value(t);
  const std::size_t k = std::min<std::size_t>(static_cast<std::size_t>(t / dt_), n - 1);
  const double f = conv_[k] + (conv_[k + 1] - conv_[k]) * (t - k * dt_) / dt_;
  return kernel_.value(t) + beta_ * f;
}

double SecondKindResolvent::integral_to(double t) const {
  if (t <= 0.0) return 0.0;
  if (t > horizon() * (1.0 + 1e-12)) throw UsageError("integral_to beyond the resolvent horizon");
  const std::size_t n = steps();
  const std::size_t k = std::min<std::size_t>(static_cast<std::size_t>(t / dt_), n);
  const double s = t - k * dt_;
  if (s <= 1e-14 * dt_ || k == n) return integral_[k];
  const double slope = (conv_[k + 1] - conv_[k]) / dt_;
  return integral_[k] + kernel_.integral(k * dt_, t) + beta_ * (conv_[k] * s + 0.5 * slope * s * s);
}

double SecondKindResolvent::residual() const {
  double worst = 0.0;
  for (std::size_t k = 1; k <= steps(); ++k) {
    double conv = kk_[k];
    for (std::size_t i = 1; i <= k; ++i) {
      const std::size_t m = k - i + 1;
      conv += beta_ * (conv_[i - 1] * cell_a_[m] + conv_[i] * cell_b_[m]);
    }
    const double kv = kernel_.value(k * dt_);
    const double r = values_[k] - kv - beta_ * conv;
    worst = std::max(worst, std::abs(r) / (std::abs(kv) + std::abs(beta_ * conv)));
  }
  return worst;
}

TailIntegrals e_beta_tail_integrals(const SecondKindResolvent& res) {
  TailIntegrals out;
  out.integral = res.cumulative_integral().back();
  for (double c : res.square_cells()) out.square_integral += c;
  out.tail_integral = res.tail().integral_from(res.horizon());
  out.tail_square = res.tail().square_integral_from(res.horizon());
  out.tail_model = res.tail().describe();
  return out;
}

double lagged_product_integral(const SecondKindResolvent& res, double lag, double upper) {
  if (lag < 0.0) throw DomainError("lag must be non-negative");
  if (!(upper > 0.0)) return 0.0;
  const double dt = res.grid_step();
  const KernelSpec& kernel = res.kernel();
  const double first = std::min(dt, upper);
  double acc;
  if (lag == 0.0) {
    acc = integrate_from_zero(
        [&](double r) {
          const double e = res(r);
          return e * e;
        },
        first, kernel.zero_cell_power(2));
  } else {
    acc = integrate_from_zero([&](double r) { return res(lag + r) * res(r); }, first, kernel.zero_cell_power(1));
  }
  double lo = first;
  while (lo < upper * (1.0 - 1e-14)) {
    const double hi = std::min(upper, lo + dt);
    acc += integrate_cell([&](double r) { return res(lag + r) * res(r); }, lo, hi);
    lo = hi;
  }
  return acc;
}

double e_beta_integral_limit(const KernelSpec& kernel, double beta) {
  if (!(beta < 0.0)) throw DomainError("beta must be negative");
  const double norm = kernel.l1_norm();
  if (std::isinf(norm)) return 1.0 / std::abs(beta);
  return 1.0 / (1.0 / norm + std::abs(beta));
}

}  // namespace vou
