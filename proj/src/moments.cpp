#include "vou/moments.hpp"

#include <cmath>
#include <numbers>

#include <boost/math/quadrature/tanh_sinh.hpp>

#include "vou/error.hpp"

namespace vou {

double c_alpha(double alpha) {
  if (!(alpha > 0.5 && alpha <= 1.0)) throw DomainError("C_alpha needs alpha in (1/2, 1]");
  if (alpha == 1.0) return 0.5;
  const double c = std::cos(0.5 * std::numbers::pi * alpha);
  auto head = [=](double u) {
    const double ua = std::pow(u, alpha);
    return 1.0 / (1.0 + 2.0 * ua * c + ua * ua);
  };
  // u = 1/w maps (1, inf) onto (0, 1).
  auto tail = [=](double w) {
    const double wa = std::pow(w, alpha);
    return std::pow(w, 2.0 * alpha - 2.0) / (wa * wa + 2.0 * c * wa + 1.0);
  };
  boost::math::quadrature::tanh_sinh<double> ts;
  const double tol = 1e-13;
  const double i1 = ts.integrate(head, 0.0, 1.0, tol);
  const double i2 = ts.integrate(tail, 0.0, 1.0, tol);
  return (i1 + i2) / std::numbers::pi;
}

double stationary_mean(const KernelSpec& kernel, double b, double beta, double x0) {
  if (!(beta < 0.0)) throw DomainError("stationary moments require beta < 0");
  const double norm = kernel.l1_norm();
  if (std::isinf(norm)) return b / std::abs(beta);
  const double d = 1.0 + norm * std::abs(beta);
  return x0 / d + b * norm / d;
}

double stationary_variance_numeric(const SecondKindResolvent& resolvent, double sigma) {
  const TailIntegrals ti = e_beta_tail_integrals(resolvent);
  return sigma * sigma * ti.total_square();
}

double stationary_autocovariance(const SecondKindResolvent& resolvent, double sigma, double lag) {
  return sigma * sigma * lagged_product_integral(resolvent, lag, resolvent.horizon());
}

StationaryMoments stationary_moments(const KernelSpec& kernel, double b, double beta, double sigma, double x0,
                                     const SecondKindResolvent* resolvent) {
  if (!(beta < 0.0)) throw DomainError("stationary moments require beta < 0");
  if (!(sigma > 0.0)) throw DomainError("stationary moments require sigma > 0");
  StationaryMoments m;
  m.m1 = stationary_mean(kernel, b, beta, x0);
  if (kernel.kind() == KernelKind::Fractional) {
    const double a = kernel.alpha();
    m.c_alpha = c_alpha(a);
    m.m_var = *m.c_alpha * sigma * sigma * std::pow(std::abs(beta), 1.0 / a - 2.0);
  } else if (resolvent != nullptr) {
    if (!(resolvent->kernel() == kernel) || resolvent->beta() != beta) {
      throw UsageError("resolvent does not match the kernel and beta");
    }
    m.m_var = stationary_variance_numeric(*resolvent, sigma);
  } else {
    const double horizon = 100.0 / std::abs(beta);
    const SecondKindResolvent res(kernel, beta, horizon / 20000.0, horizon);
    m.m_var = stationary_variance_numeric(res, sigma);
  }
  m.m2 = m.m1 * m.m1 + m.m_var;
  return m;
}

}  // namespace vou
