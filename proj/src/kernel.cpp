#include "vou/kernel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "vou/error.hpp"
#include "vou/quadrature.hpp"

namespace vou {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void require_alpha(double alpha) {
  if (!(alpha > 0.5 && alpha <= 1.0)) {
    throw DomainError("kernel alpha must lie in (1/2, 1], got " + std::to_string(alpha));
  }
}

// b^s - a^s without cancellation when a is close to b.
double power_difference(double a, double b, double s) {
  if (a <= 0.0) return std::pow(b, s);
  return std::pow(a, s) * std::expm1(s * std::log1p((b - a) / a));
}

template <class F>
double composite(F&& f, double a, double b, int panels) {
  panels = std::clamp(panels, 1, 4096);
  const double h = (b - a) / panels;
  double acc = 0.0;
  for (int j = 0; j < panels; ++j) {
    const double lo = a + j * h;
    const double hi = (j + 1 == panels) ? b : lo + h;
    acc += integrate_cell(f, lo, hi);
  }
  return acc;
}

// Panels needed for a smooth-but-graded integrand on [a, b] with a > 0.
int graded_panels(double a, double b, double rate) {
  const double ratio = (b - a) / a;
  return static_cast<int>(std::ceil(ratio) + std::ceil(rate * (b - a)));
}

double log_primitive(double t) {
  if (t <= 0.0) return 0.0;
  return t * std::log1p(1.0 / t) + std::log1p(t);
}

double log_moment_primitive(double u) {
  if (u <= 0.0) return 0.0;
  return 0.5 * (u * u - 1.0) * std::log1p(u) + 0.5 * u - 0.5 * u * u * std::log(u);
}

// int_0^b u^(alpha - 1 + m) exp(-rate u) du by the exponential series; needs rate * b <= 1.
double damped_series(double alpha, double rate, double b, int m) {
  double term = 1.0;
  double acc = 0.0;
  const double s = alpha + m;
  for (int k = 0; k < 60; ++k) {
    const double add = term / (s + k);
    acc += add;
    if (std::abs(add) < 1e-18 * std::abs(acc)) break;
    term *= -rate * b / (k + 1);
  }
  return acc * std::pow(b, s);
}

}  // namespace

KernelSpec KernelSpec::fractional(double alpha) {
  require_alpha(alpha);
  KernelSpec k;
  k.kind_ = KernelKind::Fractional;
  k.alpha_ = alpha;
  k.gamma_ = alpha - 0.5;
  k.inv_gamma_alpha_ = 1.0 / std::tgamma(alpha);
  return k;
}

KernelSpec KernelSpec::log_kernel(double alpha, double gamma) {
  require_alpha(alpha);
  if (!(gamma > 0.0 && gamma < 0.5)) {
    throw DomainError("log kernel gamma must lie in (0, 1/2)");
  }
  KernelSpec k;
  k.kind_ = KernelKind::Log;
  k.alpha_ = alpha;
  k.gamma_ = gamma;
  return k;
}

KernelSpec KernelSpec::exp_sum(std::vector<double> coefficients, std::vector<double> rates) {
  if (coefficients.empty() || coefficients.size() != rates.size()) {
    throw DomainError("exp_sum kernel needs matching, non-empty coefficient and rate lists");
  }
  for (std::size_t i = 0; i < coefficients.size(); ++i) {
    if (!(coefficients[i] > 0.0) || !std::isfinite(coefficients[i])) {
      throw DomainError("exp_sum coefficients must be positive and finite");
    }
    if (!(rates[i] >= 0.0) || !std::isfinite(rates[i])) {
      throw DomainError("exp_sum rates must be non-negative and finite");
    }
  }
  KernelSpec k;
  k.kind_ = KernelKind::ExpSum;
  k.alpha_ = 1.0;
  k.gamma_ = 0.5;
  k.coefficients_ = std::move(coefficients);
  k.rates_ = std::move(rates);
  return k;
}

KernelSpec KernelSpec::damped_fractional(double alpha, double rate) {
  require_alpha(alpha);
  if (!(rate >= 0.0) || !std::isfinite(rate)) {
    throw DomainError("damped fractional rate must be non-negative");
  }
  KernelSpec k;
  k.kind_ = KernelKind::DampedFractional;
  k.alpha_ = alpha;
  k.gamma_ = alpha - 0.5;
  k.rate_ = rate;
  k.inv_gamma_alpha_ = 1.0 / std::tgamma(alpha);
  return k;
}

double KernelSpec::k_zero_plus() const noexcept {
  switch (kind_) {
    case KernelKind::Fractional:
    case KernelKind::DampedFractional:
      return alpha_ == 1.0 ? 1.0 : kInf;
    case KernelKind::Log:
      return kInf;
    case KernelKind::ExpSum: {
      double s = 0.0;
      for (double c : coefficients_) s += c;
      return s;
    }
  }
  return kInf;
}

bool KernelSpec::is_singular() const noexcept { return std::isinf(k_zero_plus()); }

bool KernelSpec::has_power_tail() const noexcept {
  switch (kind_) {
    case KernelKind::Fractional:
      return alpha_ < 1.0;
    case KernelKind::Log:
      return true;
    case KernelKind::DampedFractional:
      return rate_ == 0.0 && alpha_ < 1.0;
    case KernelKind::ExpSum:
      return false;
  }
  return false;
}

std::string KernelSpec::name() const {
  std::ostringstream os;
  os.precision(6);
  switch (kind_) {
    case KernelKind::Fractional:
      os << "fractional(alpha=" << alpha_ << ")";
      break;
    case KernelKind::Log:
      os << "log(alpha=" << alpha_ << ", gamma=" << gamma_ << ")";
      break;
    case KernelKind::ExpSum:
      os << "exp_sum(";
      for (std::size_t i = 0; i < coefficients_.size(); ++i) {
        if (i) os << " + ";
        os << coefficients_[i] << "*exp(-" << rates_[i] << "t)";
      }
      os << ")";
      break;
    case KernelKind::DampedFractional:
      os << "damped_fractional(alpha=" << alpha_ << ", rate=" << rate_ << ")";
      break;
  }
  return os.str();
}

double KernelSpec::value(double t) const {
  if (!(t > 0.0)) throw DomainError("kernel evaluated at t <= 0");
  switch (kind_) {
    case KernelKind::Fractional:
      return alpha_ == 1.0 ? 1.0 : std::pow(t, alpha_ - 1.0) * inv_gamma_alpha_;
    case KernelKind::Log:
      return std::log1p(1.0 / t);
    case KernelKind::ExpSum: {
      double s = 0.0;
      for (std::size_t i = 0; i < coefficients_.size(); ++i) s += coefficients_[i] * std::exp(-rates_[i] * t);
      return s;
    }
    case KernelKind::DampedFractional:
      return std::pow(t, alpha_ - 1.0) * std::exp(-rate_ * t) * inv_gamma_alpha_;
  }
  return 0.0;
}

double KernelSpec::derivative(double t) const {
  if (!(t > 0.0)) throw DomainError("kernel derivative evaluated at t <= 0");
  switch (kind_) {
    case KernelKind::Fractional:
      return alpha_ == 1.0 ? 0.0 : (alpha_ - 1.0) * std::pow(t, alpha_ - 2.0) * inv_gamma_alpha_;
    case KernelKind::Log:
      return -1.0 / (t * (t + 1.0));
    case KernelKind::ExpSum: {
      double s = 0.0;
      for (std::size_t i = 0; i < coefficients_.size(); ++i) {
        s -= coefficients_[i] * rates_[i] * std::exp(-rates_[i] * t);
      }
      return s;
    }
    case KernelKind::DampedFractional:
      return value(t) * ((alpha_ - 1.0) / t - rate_);
  }
  return 0.0;
}

double KernelSpec::l1_norm() const {
  switch (kind_) {
    case KernelKind::Fractional:
    case KernelKind::Log:
      return kInf;
    case KernelKind::ExpSum: {
      double s = 0.0;
      for (std::size_t i = 0; i < coefficients_.size(); ++i) {
        if (rates_[i] == 0.0) return kInf;
        s += coefficients_[i] / rates_[i];
      }
      return s;
    }
    case KernelKind::DampedFractional:
      return rate_ > 0.0 ? std::pow(rate_, -alpha_) : kInf;
  }
  return kInf;
}

double KernelSpec::integral(double a, double b) const {
  if (!(a >= 0.0 && b > a)) throw DomainError("kernel integral needs 0 <= a < b");
  switch (kind_) {
    case KernelKind::Fractional:
      return power_difference(a, b, alpha_) * inv_gamma_alpha_ / alpha_;
    case KernelKind::Log: {
      if (a == 0.0 || b - a > 8.0 * a) return log_primitive(b) - log_primitive(a);
      return composite([](double u) { return std::log1p(1.0 / u); }, a, b, graded_panels(a, b, 0.0));
    }
    case KernelKind::ExpSum: {
      double s = 0.0;
      for (std::size_t i = 0; i < coefficients_.size(); ++i) {
        const double l = rates_[i];
        if (l == 0.0) {
          s += coefficients_[i] * (b - a);
        } else {
          s += coefficients_[i] * std::exp(-l * a) * (-std::expm1(-l * (b - a))) / l;
        }
      }
      return s;
    }
    case KernelKind::DampedFractional: {
      double acc = 0.0;
      double lo = a;
      if (a == 0.0) {
        const double b0 = rate_ > 0.0 ? std::min(b, 1.0 / rate_) : b;
        acc += damped_series(alpha_, rate_, b0, 0) * inv_gamma_alpha_;
        if (b0 >= b) return acc;
        lo = b0;
      }
      auto f = [this](double u) { return value(u); };
      return acc + composite(f, lo, b, graded_panels(lo, b, rate_));
    }
  }
  return 0.0;
}

double KernelSpec::first_moment(double a, double b) const {
  if (!(a >= 0.0 && b > a)) throw DomainError("kernel moment needs 0 <= a < b");
  switch (kind_) {
    case KernelKind::Fractional:
      return power_difference(a, b, alpha_ + 1.0) * inv_gamma_alpha_ / (alpha_ + 1.0);
    case KernelKind::Log: {
      if (a == 0.0 || b - a > 8.0 * a) return log_moment_primitive(b) - log_moment_primitive(a);
      return composite([](double u) { return u * std::log1p(1.0 / u); }, a, b, graded_panels(a, b, 0.0));
    }
    case KernelKind::ExpSum: {
      double rmax = 0.0;
      for (double l : rates_) rmax = std::max(rmax, l);
      auto f = [this](double u) { return u * value(u); };
      return composite(f, a, b, 1 + static_cast<int>(std::ceil(rmax * (b - a))));
    }
    case KernelKind::DampedFractional: {
      double acc = 0.0;
      double lo = a;
      if (a == 0.0) {
        const double b0 = rate_ > 0.0 ? std::min(b, 1.0 / rate_) : b;
        acc += damped_series(alpha_, rate_, b0, 1) * inv_gamma_alpha_;
        if (b0 >= b) return acc;
        lo = b0;
      }
      auto f = [this](double u) { return u * value(u); };
      return acc + composite(f, lo, b, graded_panels(lo, b, rate_));
    }
  }
  return 0.0;
}

double KernelSpec::self_convolution(double t) const {
  if (!(t > 0.0)) throw DomainError("self convolution evaluated at t <= 0");
  switch (kind_) {
    case KernelKind::Fractional:
      return std::pow(t, 2.0 * alpha_ - 1.0) / std::tgamma(2.0 * alpha_);
    case KernelKind::DampedFractional:
      return std::pow(t, 2.0 * alpha_ - 1.0) / std::tgamma(2.0 * alpha_) * std::exp(-rate_ * t);
    case KernelKind::ExpSum: {
      double s = 0.0;
      for (std::size_t i = 0; i < coefficients_.size(); ++i) {
        for (std::size_t j = 0; j < coefficients_.size(); ++j) {
          const double lo = std::min(rates_[i], rates_[j]);
          const double hi = std::max(rates_[i], rates_[j]);
          const double d = hi - lo;
          const double f = d == 0.0 ? t : -std::expm1(-d * t) / d;
          s += coefficients_[i] * coefficients_[j] * std::exp(-lo * t) * f;
        }
      }
      return s;
    }
    case KernelKind::Log: {
      // Symmetric about t/2; u = (t/2) w^3 removes the log singularity at 0.
      const auto& rule = gauss_legendre_16();
      const double half = 0.5 * t;
      double acc = 0.0;
      constexpr int kPanels = 4;
      for (int j = 0; j < kPanels; ++j) {
        const double w0 = static_cast<double>(j) / kPanels;
        for (std::size_t q = 0; q < GaussRule::kPoints; ++q) {
          const double w = w0 + rule.nodes[q] / kPanels;
          const double u = half * w * w * w;
          acc += rule.weights[q] / kPanels * std::log1p(1.0 / u) * std::log1p(1.0 / (t - u)) * 3.0 * half * w * w;
        }
      }
      return 2.0 * acc;
    }
  }
  return 0.0;
}

double KernelSpec::zero_cell_power(int power) const {
  switch (kind_) {
    case KernelKind::Fractional:
    case KernelKind::DampedFractional:
      return 1.0 / (1.0 - power * (1.0 - alpha_));
    case KernelKind::Log:
      return 3.0;
    case KernelKind::ExpSum:
      return 1.0;
  }
  return 1.0;
}

double assumption_a_bound(const KernelSpec& kernel, double dt, double horizon) {
  if (!(dt > 0.0 && horizon >= dt)) throw DomainError("assumption check needs 0 < dt <= T");
  const double a = kernel.alpha();
  const auto n = static_cast<long>(std::floor(horizon / dt + 1e-9));
  double sup = 0.0;
  for (long k = 1; k <= n; ++k) {
    const double t = k * dt;
    const double v = std::pow(t, 1.0 - a) * std::abs(kernel.value(t)) +
                     std::pow(t, 2.0 - a) * std::abs(kernel.derivative(t));
    sup = std::max(sup, v);
  }
  return sup;
}

void to_json(nlohmann::json& j, const KernelSpec& kernel) {
  switch (kernel.kind()) {
    case KernelKind::Fractional:
      j = {{"kind", "fractional"}, {"params", {{"alpha", kernel.alpha()}}}};
      break;
    case KernelKind::Log:
      j = {{"kind", "log"}, {"params", {{"alpha", kernel.alpha()}, {"gamma", kernel.gamma()}}}};
      break;
    case KernelKind::ExpSum: {
      std::vector<double> c(kernel.coefficients().begin(), kernel.coefficients().end());
      std::vector<double> r(kernel.rates().begin(), kernel.rates().end());
      j = {{"kind", "exp_sum"}, {"params", {{"coefficients", c}, {"rates", r}}}};
      break;
    }
    case KernelKind::DampedFractional:
      j = {{"kind", "damped_fractional"}, {"params", {{"alpha", kernel.alpha()}, {"rate", kernel.rate()}}}};
      break;
  }
}

KernelSpec kernel_from_json(const nlohmann::json& j) {
  try {
    const std::string kind = j.at("kind").get<std::string>();
    const nlohmann::json params = j.value("params", nlohmann::json::object());
    if (kind == "fractional") return KernelSpec::fractional(params.at("alpha").get<double>());
    if (kind == "log") {
      return KernelSpec::log_kernel(params.value("alpha", 0.99), params.value("gamma", 0.49));
    }
    if (kind == "exp_sum") {
      return KernelSpec::exp_sum(params.at("coefficients").get<std::vector<double>>(),
                                 params.at("rates").get<std::vector<double>>());
    }
    if (kind == "damped_fractional") {
      return KernelSpec::damped_fractional(params.at("alpha").get<double>(), params.at("rate").get<double>());
    }
    if (kind == "constant") return KernelSpec::constant_one();
    throw DomainError("unknown kernel kind '" + kind + "'");
  } catch (const nlohmann::json::exception& e) {
    throw DomainError(std::string("malformed kernel specification: ") + e.what());
  }
}

}  // namespace vou
