#include "vou/first_kind.hpp"

#include <algorithm>
#include <cmath>

#include "vou/error.hpp"
#include "vou/grid.hpp"

namespace vou {

namespace {

constexpr double kNegativeMassTolerance = 1e-10;

void fill_cumulative(FirstKindResolvent& r) {
  r.cumulative_masses.assign(r.interval_masses.size() + 1, 0.0);
  for (std::size_t k = 0; k < r.interval_masses.size(); ++k) {
    r.cumulative_masses[k + 1] = r.cumulative_masses[k] + r.interval_masses[k];
  }
}

double atom_of(const KernelSpec& kernel) {
  const double k0 = kernel.k_zero_plus();
  return std::isinf(k0) ? 0.0 : 1.0 / k0;
}

}  // namespace

std::vector<double> kernel_weights(const KernelSpec& kernel, double dt, std::size_t n, ResolventRule rule) {
  std::vector<double> w(n + 1, 0.0);
  for (std::size_t m = 1; m <= n; ++m) {
    const double a = static_cast<double>(m - 1) * dt;
    const double b = static_cast<double>(m) * dt;
    w[m] = rule == ResolventRule::PointValues ? kernel.value(b) : kernel.integral(a, b) / dt;
  }
  return w;
}

FirstKindResolvent first_kind_resolvent(const KernelSpec& kernel, double dt, double horizon,
                                        FirstKindOptions options) {
  const std::size_t n = step_count(horizon, dt);
  FirstKindResolvent r{kernel, dt, atom_of(kernel), {}, {}, options.rule, options.method, options.atom_on_weights};
  r.interval_masses.assign(n, 0.0);

  if (options.method == FirstKindMethod::Analytic) {
    if (kernel.kind() != KernelKind::Fractional) {
      throw UsageError("analytic first-kind resolvent is only available for the fractional kernel");
    }
    if (kernel.alpha() < 1.0) {
      const double s = 1.0 - kernel.alpha();
      const double norm = 1.0 / std::tgamma(2.0 - kernel.alpha());
      for (std::size_t k = 1; k <= n; ++k) {
        r.interval_masses[k - 1] =
            (std::pow(k * dt, s) - std::pow((k - 1) * dt, s)) * norm;
      }
    }
    fill_cumulative(r);
    return r;
  }

  const std::vector<double> w = kernel_weights(kernel, dt, n, options.rule);
  std::vector<double>& L = r.interval_masses;
  for (std::size_t k = 1; k <= n; ++k) {
    double rhs = 1.0;
    if (r.atom > 0.0) rhs -= r.atom * (options.atom_on_weights ? w[k] : kernel.value(k * dt));
    for (std::size_t j = 1; j < k; ++j) rhs -= L[j - 1] * w[k - j + 1];
    double mass = rhs / w[1];
    if (mass < 0.0) {
      if (mass < -kNegativeMassTolerance) {
        throw NumericalError("negative first-kind resolvent mass " + std::to_string(mass) + " at step " +
                             std::to_string(k) + " for " + kernel.name());
      }
      mass = 0.0;
    }
    L[k - 1] = mass;
  }
  fill_cumulative(r);
  return r;
}

FirstKindResolvent coarsen(const FirstKindResolvent& resolvent, std::size_t factor) {
  if (factor == 0) throw UsageError("coarsening factor must be positive");
  if (factor == 1) return resolvent;
  FirstKindResolvent c = resolvent;
  c.grid_step = resolvent.grid_step * static_cast<double>(factor);
  const std::size_t n = resolvent.steps() / factor;
  c.interval_masses.assign(n, 0.0);
  for (std::size_t k = 0; k < n; ++k) {
    double s = 0.0;
    for (std::size_t j = 0; j < factor; ++j) s += resolvent.interval_masses[k * factor + j];
    c.interval_masses[k] = s;
  }
  fill_cumulative(c);
  return c;
}

double first_kind_identity_defect(const FirstKindResolvent& r) {
  const std::size_t n = r.steps();
  const std::vector<double> w = kernel_weights(r.kernel, r.grid_step, n, r.rule);
  double worst = 0.0;
  for (std::size_t k = 1; k <= n; ++k) {
    double s = r.atom > 0.0 ? r.atom * (r.atom_on_weights ? w[k] : r.kernel.value(k * r.grid_step)) : 0.0;
    for (std::size_t j = 1; j <= k; ++j) s += r.interval_masses[j - 1] * w[k - j + 1];
    worst = std::max(worst, std::abs(s - 1.0));
  }
  return worst;
}

GrowthReport resolvent_growth_check(const FirstKindResolvent& r) {
  if (r.horizon() < 1.0 - 1e-12) throw UsageError("growth check needs a resolvent reaching t >= 1");
  GrowthReport rep;
  const bool fractional = r.kernel.kind() == KernelKind::Fractional && r.kernel.alpha() < 1.0;
  for (std::size_t k = 1; k <= r.steps(); ++k) {
    const double t = k * r.grid_step;
    if (t < 1.0 - 1e-12) continue;
    const double c = r.cumulative(k);
    const double ratio = c * r.kernel.value(t);
    rep.t.push_back(t);
    rep.cumulative.push_back(c);
    rep.bound_ratio.push_back(ratio);
    if (fractional) rep.power_ratio.push_back(c / std::pow(t, 1.0 - r.kernel.alpha()));
    rep.max_bound_ratio = std::max(rep.max_bound_ratio, ratio);
  }
  rep.violated = rep.max_bound_ratio > 1.0 + 1e-12;
  return rep;
}

}  // namespace vou
