#include <cmath>
#include <limits>

#include "doctest.h"
#include "vou/error.hpp"
#include "vou/first_kind.hpp"
#include "vou/kernel.hpp"

using namespace vou;
using doctest::Approx;

namespace {
std::vector<KernelSpec> bundled() {
  return {KernelSpec::constant_one(),       KernelSpec::fractional(0.75),
          KernelSpec::fractional(0.55),     KernelSpec::log_kernel(),
          KernelSpec::exp_sum({1, 2}, {1, 2}), KernelSpec::damped_fractional(0.75, 1.0)};
}
}  // namespace

TEST_CASE("kernel values") {
  CHECK(KernelSpec::fractional(1.0).value(7.3) == Approx(1.0).epsilon(1e-15));
  // 1 / Gamma(0.75)
  CHECK(KernelSpec::fractional(0.75).value(1.0) == Approx(0.816048939098263).epsilon(1e-13));
  CHECK(KernelSpec::exp_sum({1, 2}, {1, 2}).k_zero_plus() == 3.0);
  CHECK(std::isinf(KernelSpec::fractional(0.75).k_zero_plus()));
  CHECK(KernelSpec::log_kernel().value(1.0) == Approx(std::log(2.0)).epsilon(1e-15));
}

TEST_CASE("kernel derivatives") {
  CHECK(KernelSpec::fractional(1.0).derivative(3.0) == 0.0);
  CHECK(KernelSpec::fractional(0.75).derivative(1.0) == Approx(-0.204012234774566).epsilon(1e-12));
  CHECK(KernelSpec::exp_sum({1}, {2}).derivative(0.5) == Approx(-0.735758882342885).epsilon(1e-12));
  CHECK(KernelSpec::log_kernel().derivative(1.0) == Approx(-0.5).epsilon(1e-14));
}

TEST_CASE("kernel l1 norms") {
  CHECK(std::isinf(KernelSpec::fractional(0.75).l1_norm()));
  CHECK(std::isinf(KernelSpec::log_kernel().l1_norm()));
  CHECK(std::isinf(KernelSpec::constant_one().l1_norm()));
  CHECK(KernelSpec::exp_sum({1, 2}, {1, 2}).l1_norm() == Approx(2.0));
  CHECK(KernelSpec::damped_fractional(0.75, 1.0).l1_norm() == Approx(1.0).epsilon(1e-10));
}

TEST_CASE("kernel cell integrals match the power law") {
  const auto k = KernelSpec::fractional(0.75);
  // t^0.75 / Gamma(1.75)
  CHECK(k.integral(0.0, 1.0) == Approx(1.0 / std::tgamma(1.75)).epsilon(1e-12));
  CHECK(k.integral(0.0, 2.0) - k.integral(0.0, 1.0) == Approx(k.integral(1.0, 2.0)).epsilon(1e-12));
}

TEST_CASE("kernel construction errors") {
  CHECK_THROWS_AS(KernelSpec::fractional(0.4), DomainError);
  CHECK_THROWS_AS(KernelSpec::fractional(1.2), DomainError);
  CHECK_THROWS_AS(KernelSpec::log_kernel(0.99, 0.6), DomainError);
  CHECK_THROWS_AS(KernelSpec::exp_sum({1, 2}, {1}), DomainError);
  CHECK_THROWS_AS(KernelSpec::exp_sum({-1}, {1}), DomainError);
  CHECK_THROWS_AS(KernelSpec::fractional(0.75).value(0.0), DomainError);
  CHECK_THROWS_AS(KernelSpec::fractional(0.75).derivative(-1.0), DomainError);
}

TEST_CASE("complete monotonicity spot check") {
  for (const auto& k : bundled()) {
    CAPTURE(k.name());
    double prev = std::numeric_limits<double>::infinity();
    for (double t = 0.01; t < 50.0; t *= 1.3) {
      const double v = k.value(t);
      CHECK(v > 0.0);
      CHECK(v <= prev);
      CHECK(k.derivative(t) <= 0.0);
      prev = v;
    }
  }
}

TEST_CASE("assumption A bound is stable under refinement") {
  for (const auto& k : bundled()) {
    CAPTURE(k.name());
    const double a = assumption_a_bound(k, 1e-2, 10.0);
    const double b = assumption_a_bound(k, 5e-3, 10.0);
    CHECK(std::isfinite(a));
    if (k.kind() == KernelKind::Log) {
      // t^0.01 log(1/t) peaks only at t = e^-100, so each halving adds about log 2
      CHECK(b - a == Approx(std::log(2.0) * std::pow(5e-3, 0.01)).epsilon(0.05));
    } else {
      CHECK(std::abs(a - b) <= 0.01 * std::abs(b));
    }
  }
}

TEST_CASE("kernel json round trip") {
  for (const auto& k : bundled()) {
    nlohmann::json j;
    to_json(j, k);
    CHECK(kernel_from_json(j) == k);
  }
  CHECK_THROWS_AS(kernel_from_json(nlohmann::json{{"kind", "gaussian"}}), DomainError);
}

TEST_CASE("first-kind resolvent of K = 1 is a unit atom") {
  const auto L = first_kind_resolvent(KernelSpec::constant_one(), 0.1, 5.0);
  CHECK(L.atom == Approx(1.0));
  for (double m : L.interval_masses) CHECK(std::abs(m) < 1e-14);
}

TEST_CASE("first-kind resolvent of the fractional kernel") {
  const auto L = first_kind_resolvent(KernelSpec::fractional(0.75), 1e-3, 2.0);
  CHECK(L.atom == 0.0);
  // 1 / Gamma(1.25)
  CHECK(L.cumulative(1000) == Approx(1.103262651320837).epsilon(1e-3));
  const auto A = first_kind_resolvent(KernelSpec::fractional(0.75), 1e-3, 2.0,
                                      {ResolventRule::ProductIntegration, FirstKindMethod::Analytic});
  CHECK(A.cumulative(1000) == Approx(1.103262651320837).epsilon(1e-12));
  const auto g = resolvent_growth_check(A);
  for (double r : g.power_ratio) CHECK(r == Approx(1.103262651320837).epsilon(1e-10));
}

TEST_CASE("first-kind identity and bounds for every kernel") {
  for (const auto& k : bundled()) {
    CAPTURE(k.name());
    const auto L = first_kind_resolvent(k, 1e-2, 10.0);
    CHECK(first_kind_identity_defect(L) <= 1e-6);
    for (double m : L.interval_masses) CHECK(m >= 0.0);
    const auto g = resolvent_growth_check(L);
    CHECK_FALSE(g.violated);
    CHECK(g.max_bound_ratio <= 1.0 + 1e-9);
  }
}

TEST_CASE("exp-sum resolvent atom") {
  const auto L = first_kind_resolvent(KernelSpec::exp_sum({1, 2}, {1, 2}), 1e-2, 10.0);
  CHECK(L.atom == Approx(1.0 / 3.0));
}

TEST_CASE("first-kind resolvent rejects bad grids") {
  CHECK_THROWS_AS(first_kind_resolvent(KernelSpec::fractional(0.75), 0.0, 1.0), DomainError);
  CHECK_THROWS_AS(first_kind_resolvent(KernelSpec::log_kernel(), 1e-2, 1.0,
                                       {ResolventRule::ProductIntegration, FirstKindMethod::Analytic}),
                  UsageError);
}
