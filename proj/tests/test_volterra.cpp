#include <cmath>

#include "doctest.h"
#include "oracles.hpp"
#include "vou/error.hpp"
#include "vou/first_kind.hpp"
#include "vou/moments.hpp"
#include "vou/second_kind.hpp"
#include "vou/transforms.hpp"

using namespace vou;
using doctest::Approx;

TEST_CASE("E_beta for K = 1 is the exponential") {
  SecondKindResolvent res(KernelSpec::constant_one(), -1.0, 1e-3, 5.0);
  double err = 0.0;
  for (std::size_t k = 0; k <= res.steps(); ++k) {
    err = std::max(err, std::abs(res.values()[k] - std::exp(-res.grid_step() * k)));
  }
  CHECK(err <= 1e-4);
}

TEST_CASE("E_beta for the fractional kernel matches Mittag-Leffler") {
  for (double a : {0.6, 0.75, 0.9}) {
    CAPTURE(a);
    SecondKindResolvent res(KernelSpec::fractional(a), -1.0, 1e-3, 2.0);
    for (double t : {0.25, 0.5, 1.0, 2.0}) {
      const auto k = static_cast<std::size_t>(std::lround(t / 1e-3));
      CHECK(res.values()[k] == Approx(oracle::fractional_resolvent(a, -1.0, t)).epsilon(1e-3));
    }
  }
  // frozen series values at alpha = 0.75
  CHECK(oracle::fractional_resolvent(0.75, -1.0, 1.0) == Approx(0.232237720100961).epsilon(1e-12));
  CHECK(oracle::fractional_resolvent(0.75, -1.0, 2.0) == Approx(0.0954930095314363).epsilon(1e-12));
}

TEST_CASE("E_beta residual, monotone comparison and positivity") {
  const std::vector<KernelSpec> kernels{KernelSpec::constant_one(), KernelSpec::fractional(0.75),
                                        KernelSpec::log_kernel(), KernelSpec::exp_sum({1, 2}, {1, 2}),
                                        KernelSpec::damped_fractional(0.75, 1.0)};
  for (const auto& k : kernels) {
    CAPTURE(k.name());
    std::vector<SecondKindResolvent> rs;
    for (double beta : {-0.5, -1.0, -2.0}) {
      rs.emplace_back(k, beta, 1e-2, 10.0);
      CHECK(rs.back().residual() <= 1e-8);
    }
    for (std::size_t i = 1; i <= rs[0].steps(); ++i) {
      CHECK(rs[2].values()[i] <= rs[1].values()[i] + 1e-12);
      CHECK(rs[1].values()[i] <= rs[0].values()[i] + 1e-12);
      CHECK(rs[1].values()[i] > 0.0);
    }
  }
  CHECK_THROWS_AS(SecondKindResolvent(KernelSpec::constant_one(), 0.0, 0.1, 1.0), DomainError);
}

TEST_CASE("E_beta integrals") {
  SUBCASE("K = 1") {
    SecondKindResolvent res(KernelSpec::constant_one(), -1.0, 1e-3, 40.0);
    CHECK(e_beta_tail_integrals(res).integral == Approx(1.0).epsilon(1e-6));
  }
  SUBCASE("exp sum") {
    SecondKindResolvent res(KernelSpec::exp_sum({1, 2}, {1, 2}), -1.0, 1e-2, 60.0);
    CHECK(std::abs(e_beta_tail_integrals(res).integral - 2.0 / 3.0) <= 1e-4);
    CHECK(e_beta_integral_limit(res.kernel(), -1.0) == Approx(2.0 / 3.0));
  }
  SUBCASE("fractional") {
    SecondKindResolvent res(KernelSpec::fractional(0.75), -1.0, 1e-2, 200.0);
    CHECK(std::abs(e_beta_tail_integrals(res).integral - 1.0) <= 0.02);
  }
}

TEST_CASE("C_alpha") {
  CHECK(c_alpha(1.0) == Approx(0.5).epsilon(1e-12));
  CHECK(c_alpha(0.95) == Approx(0.5033209279803896).epsilon(1e-8));
  CHECK(c_alpha(0.75) == Approx(0.6377234979682674).epsilon(1e-8));
  CHECK(c_alpha(0.55) == Approx(2.872284007112496).epsilon(1e-8));
  CHECK_THROWS_AS(c_alpha(0.5), DomainError);
  CHECK_THROWS_AS(c_alpha(1.1), DomainError);
}

TEST_CASE("C_alpha against the grid integral of E_beta squared") {
  SecondKindResolvent res(KernelSpec::fractional(0.75), -1.0, 1e-2, 200.0);
  CHECK(stationary_variance_numeric(res, 1.0) == Approx(c_alpha(0.75)).epsilon(0.01));
}

TEST_CASE("stationary moments") {
  const auto m = stationary_moments(KernelSpec::fractional(0.75), 1.2, -1.0, 0.3, 1.0);
  CHECK(m.m1 == Approx(1.2));
  CHECK(m.m_var == Approx(0.6377234979682674 * 0.09).epsilon(1e-8));
  CHECK(m.m2 == Approx(1.44 + m.m_var));
  REQUIRE(m.c_alpha);
  CHECK(stationary_mean(KernelSpec::exp_sum({1}, {1}), 0.0, -1.0, 1.0) == Approx(0.5));
  // E_beta = exp(-2t) here, so m_var = sigma^2 / 4
  const auto e = stationary_moments(KernelSpec::exp_sum({1}, {1}), 0.0, -1.0, 0.3, 1.0);
  CHECK(e.m_var == Approx(0.09 / 4).epsilon(1e-4));
  CHECK_FALSE(e.c_alpha);
  CHECK_THROWS_AS(stationary_moments(KernelSpec::constant_one(), 0, 1.0, 0.3, 0), DomainError);
}

TEST_CASE("Z transform") {
  SUBCASE("K = 1 gives X - x0") {
    const auto L = first_kind_resolvent(KernelSpec::constant_one(), 0.1, 1.0);
    PathOnGrid p{{2.0, 2.5, 1.5, 3.0, 2.0, 2.2, 2.1, 2.0, 1.9, 1.8, 4.0}, 0.1, 2.0};
    const auto z = z_transform(p, L);
    for (std::size_t k = 0; k < p.values.size(); ++k) CHECK(z.values[k] == Approx(p.values[k] - 2.0));
  }
  SUBCASE("constant path") {
    const auto L = first_kind_resolvent(KernelSpec::fractional(0.75), 0.1, 1.0);
    PathOnGrid p{std::vector<double>(11, 3.0), 0.1, 3.0};
    for (double v : z_transform(p, L).values) CHECK(v == 0.0);
  }
  SUBCASE("identity path under the analytic masses") {
    const double a = 0.75, dt = 1e-3;
    const auto L = first_kind_resolvent(KernelSpec::fractional(a), dt, 1.0,
                                        {ResolventRule::ProductIntegration, FirstKindMethod::Analytic});
    PathOnGrid p;
    p.grid_step = dt;
    for (int k = 0; k <= 1000; ++k) p.values.push_back(k * dt);
    const auto z = z_transform(p, L);
    const double exact = 1.0 / ((2 - a) * (1 - a) * std::tgamma(1 - a));
    CHECK(z.values.back() == Approx(exact).epsilon(std::pow(dt, a - 0.5)));
  }
  SUBCASE("grids must nest") {
    const auto L = first_kind_resolvent(KernelSpec::fractional(0.75), 0.03, 3.0);
    PathOnGrid p{std::vector<double>(11, 1.0), 0.1, 1.0};
    CHECK_THROWS_AS(z_transform(p, L), UsageError);
  }
}

TEST_CASE("Gamma transform") {
  PathOnGrid z{{0.0, 0.3, -0.2, 0.5}, 0.5, 0.0};
  const auto g = gamma_transform(z, KernelSpec::constant_one());
  for (std::size_t k = 0; k < 4; ++k) CHECK(g.values[k] == Approx(z.values[k]));
  PathOnGrid zero{std::vector<double>(5, 0.0), 0.5, 0.0};
  for (double v : gamma_transform(zero, KernelSpec::fractional(0.75)).values) CHECK(v == 0.0);
  PathOnGrid bad{{1.0, 2.0}, 0.5, 0.0};
  CHECK_THROWS_AS(gamma_transform(bad, KernelSpec::fractional(0.75)), UsageError);
}

TEST_CASE("Gamma inverts Z on a smooth path") {
  const double dt = 1e-3;
  const auto k = KernelSpec::fractional(0.75);
  const auto L = first_kind_resolvent(k, dt, 2.0);
  PathOnGrid x;
  x.grid_step = dt;
  x.x0 = 1.0;
  for (int i = 0; i <= 2000; ++i) x.values.push_back(std::sin(i * dt) + 1.0);
  const auto g = gamma_transform(z_transform(x, L), k);
  double err = 0.0;
  for (std::size_t i = 0; i < x.values.size(); ++i) err = std::max(err, std::abs(g.values[i] - (x.values[i] - 1.0)));
  CHECK(err <= 1e-2);
}

TEST_CASE("Z inverts Gamma on a path starting at zero") {
  const double dt = 1e-3;
  const auto k = KernelSpec::fractional(0.75);
  const auto L = first_kind_resolvent(k, dt, 1.0);
  PathOnGrid z;
  z.grid_step = dt;
  for (int i = 0; i <= 1000; ++i) z.values.push_back(std::sin(i * dt));
  PathOnGrid g = gamma_transform(z, k);
  g.x0 = 0.0;
  const auto back = z_transform(g, L);
  double err = 0.0;
  for (std::size_t i = 0; i < z.values.size(); ++i) err = std::max(err, std::abs(back.values[i] - z.values[i]));
  CHECK(err <= 1e-2);
}
