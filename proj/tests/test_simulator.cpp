#include <cmath>

#include "doctest.h"
#include "vou/error.hpp"
#include "vou/moments.hpp"
#include "vou/rng.hpp"
#include "vou/simulator.hpp"
#include "vou/stats.hpp"

using namespace vou;
using doctest::Approx;

TEST_CASE("path seeds do not depend on the batch size") {
  CHECK(path_seed(7, 3) == splitmix64(7 + 0x9e3779b97f4a7c15ULL * 4));
  CHECK(path_seed(7, 0) != path_seed(7, 1));
  NormalStream a(42), b(42);
  for (int i = 0; i < 10; ++i) CHECK(a() == b());
}

TEST_CASE("deterministic Euler limit") {
  VouParams p{0.0, -1.0, 0.0, 1.0};
  SimulationOptions o;
  o.allow_zero_sigma = true;
  const auto path = simulate_euler(KernelSpec::constant_one(), p, 1000, 5.0, 1, o);
  double err = 0.0;
  for (std::size_t k = 0; k < path.values.size(); ++k) {
    err = std::max(err, std::abs(path.values[k] - std::exp(-path.grid_step * k)));
  }
  CHECK(err <= 5.0 / 1000);
  CHECK_THROWS_AS(simulate_euler(KernelSpec::constant_one(), p, 100, 1.0, 1), DomainError);
  VouParams neg{0.0, -1.0, -0.1, 1.0};
  CHECK_THROWS_AS(simulate_euler(KernelSpec::constant_one(), neg, 100, 1.0, 1), DomainError);
}

TEST_CASE("same seed, same bytes") {
  const VouParams p;
  const auto k = KernelSpec::fractional(0.75);
  const auto a = simulate_euler(k, p, 200, 20.0, 99, {true});
  const auto b = simulate_euler(k, p, 200, 20.0, 99, {true});
  CHECK(a.values == b.values);
  CHECK(a.noise == b.noise);
  CHECK(a.noise.size() == 200);
  CHECK(a.values[0] == p.x0);
  SecondKindResolvent res(k, p.beta, 0.025, 20.0);
  CHECK(simulate_resolvent(res, p, 200, 20.0, 5).values == simulate_resolvent(res, p, 200, 20.0, 5).values);
}

TEST_CASE("resolvent scheme: zero mean and the classical OU variance") {
  VouParams p{0.0, -1.0, 0.3, 0.0};
  SecondKindResolvent res(KernelSpec::constant_one(), -1.0, 0.01, 10.0);
  ResolventSimulator sim(res, p, 100, 10.0);
  std::vector<double> end;
  for (std::uint64_t i = 0; i < 10000; ++i) end.push_back(sim.simulate(path_seed(11, i)).values.back());
  const auto s = summarize(end);
  CHECK(std::abs(s.mean) <= 3 * s.se);
  // the grid marginal variance is exact by construction
  double var = 0.0;
  for (double w : sim.weights()) var += w * w * 0.1;
  CHECK(0.09 * var == Approx(0.09 * (1 - std::exp(-20.0)) / 2).epsilon(0.01));
}

TEST_CASE("Cholesky covariance of the classical OU process") {
  VouParams p{0.0, -1.0, 1.0, 0.0};
  SecondKindResolvent res(KernelSpec::constant_one(), -1.0, 1e-3, 4.0);
  CholeskySampler sampler(res, p, 40, 4.0);
  const auto& c = sampler.covariance();
  double err = 0.0;
  for (int i = 0; i < 40; ++i) {
    for (int j = 0; j < 40; ++j) {
      const double t = 0.1 * (i + 1), s = 0.1 * (j + 1);
      const double exact = std::exp(-std::abs(t - s)) * (1 - std::exp(-2 * std::min(s, t))) / 2;
      err = std::max(err, std::abs(c(i, j) - exact));
    }
  }
  CHECK(err <= 1e-4);
  CHECK_THROWS_AS(CholeskySampler(res, p, 2001, 4.0), UsageError);
}

TEST_CASE("Cholesky marginal passes a KS test") {
  const auto k = KernelSpec::fractional(0.75);
  const VouParams p;
  SecondKindResolvent res(k, p.beta, 0.025, 5.0);
  CholeskySampler sampler(res, p, 50, 5.0);
  const double mean = sampler.mean()(49), sd = std::sqrt(sampler.covariance()(49, 49));
  std::vector<double> u;
  for (std::uint64_t i = 0; i < 2000; ++i) u.push_back((sampler.simulate(path_seed(3, i)).values.back() - mean) / sd);
  CHECK(ks_test_standard_normal(u).p_value >= 0.01);
}

TEST_CASE("Euler and resolvent schemes agree in variance") {
  const auto k = KernelSpec::fractional(0.75);
  const VouParams p;
  SecondKindResolvent res(k, p.beta, 0.025, 5.0);
  ResolventSimulator rs(res, p, 50, 5.0);
  EulerSimulator es(k, p, 50, 5.0, {false, false, ResolventRule::ProductIntegration});
  std::vector<double> a, b;
  for (std::uint64_t i = 0; i < 4000; ++i) {
    a.push_back(es.simulate(path_seed(1, i)).values.back());
    b.push_back(rs.simulate(path_seed(2, i)).values.back());
  }
  const auto sa = summarize(a), sb = summarize(b);
  const double va = sa.sd * sa.sd, vb = sb.sd * sb.sd;
  // SE of a Gaussian sample variance is v sqrt(2 / (n - 1))
  const double se = std::sqrt(2.0 / 3999) * std::hypot(va, vb);
  CHECK(std::abs(va - vb) <= 3 * se);
  CHECK(std::abs(sa.mean - sb.mean) <= 3 * std::hypot(sa.se, sb.se));
}

TEST_CASE("stationary scheme marginals and autocovariance") {
  const auto k = KernelSpec::exp_sum({1}, {1});
  const VouParams p{1.2, -1.0, 0.3, 1.0};
  SecondKindResolvent res(k, p.beta, 0.025, 60.0);
  StationarySimulator sim(res, p, 100, 10.0);
  CHECK(sim.burn_in() == Approx(50.0));
  CHECK(sim.warning().empty());
  const double m1 = stationary_mean(k, p.b, p.beta, p.x0);
  std::vector<double> x0, x1;
  for (std::uint64_t i = 0; i < 4000; ++i) {
    const auto path = sim.simulate(path_seed(8, i));
    x0.push_back(path.values[0]);
    x1.push_back(path.values[10]);
  }
  const auto s = summarize(x0);
  CHECK(std::abs(s.mean - m1) <= 3 * s.se);
  // E_beta = exp(-2t), so cov at lag 1 is sigma^2 exp(-2) / 4
  const double c = sample_covariance(x0, x1);
  CHECK(stationary_autocovariance(res, 0.3, 1.0) == Approx(0.09 * std::exp(-2.0) / 4).epsilon(1e-3));
  CHECK(std::abs(c - 0.09 * std::exp(-2.0) / 4) <= 3 * 0.09 / 4 * std::sqrt(2.0 / 4000));
}
