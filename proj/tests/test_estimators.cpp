#include <cmath>

#include "doctest.h"
#include "oracles.hpp"
#include "vou/error.hpp"
#include "vou/estimators.hpp"
#include "vou/moments.hpp"
#include "vou/rng.hpp"
#include "vou/simulator.hpp"

using namespace vou;
using doctest::Approx;

namespace {

EstimationInput ou_input(std::uint64_t seed, const VouParams& p, std::size_t n = 500, double T = 50.0) {
  const auto k = KernelSpec::constant_one();
  const auto path = simulate_euler(k, p, n, T, seed);
  const auto L = first_kind_resolvent(k, T / n, T, {ResolventRule::PointValues});
  return prepare_estimation(path, L, 1);
}

}  // namespace

TEST_CASE("K = 1 estimators match the classical OU formulas") {
  const VouParams p;
  for (std::uint64_t i = 0; i < 50; ++i) {
    const auto in = ou_input(path_seed(20240611, i), p);
    const auto o = oracle::classical_ou(in.x, in.grid_step(), p.b, p.beta);
    const auto mle = mle_discrete(in);
    CHECK(mle.b_hat == Approx(o.b).epsilon(1e-10));
    CHECK(mle.beta_hat == Approx(o.beta).epsilon(1e-10));
    CHECK(mle_known_beta(in, p.beta).b_hat == Approx(o.b_known_beta).epsilon(1e-10));
    CHECK(mle_known_b(in, p.b).beta_hat == Approx(o.beta_known_b).epsilon(1e-10));
  }
}

TEST_CASE("degenerate inputs") {
  EstimationInput in;
  in.n = in.m = 10;
  in.horizon = 1.0;
  in.x.assign(11, 2.0);
  in.z_fine.assign(11, 0.0);
  CHECK_THROWS_AS(mle_discrete(in), DegenerateError);
  in.x.assign(11, 0.0);
  CHECK_THROWS_AS(mle_known_b(in, 1.0), DegenerateError);
  CHECK_THROWS_AS(method_of_moments(std::vector<double>(11, 1.0), 0.1, 0.75, 0.3), DegenerateError);
}

TEST_CASE("known-beta reduction") {
  EstimationInput in;
  in.n = in.m = 2;
  in.horizon = 2.0;
  in.x = {0.0, 1.0, 2.0};
  in.z_fine = {0.0, 1.0, 2.4};
  in.z_coarse_terminal = 2.4;
  CHECK(mle_known_beta(in, 0.0).b_hat == Approx(1.2));
}

TEST_CASE("method of moments inverts the stationary moments") {
  const double a = 0.75, m2 = 1.44 + c_alpha(a) * 0.09;
  // left-point averages only see the first two samples
  const double sd = std::sqrt(m2 - 1.44);
  std::vector<double> x{1.2 + sd, 1.2 - sd, 0.0};
  const auto e = method_of_moments(x, 1.0, a, 0.3);
  CHECK(e.b_hat == Approx(1.2).epsilon(1e-12));
  CHECK(e.beta_hat == Approx(-1.0).epsilon(1e-12));
}

TEST_CASE("moment error predictor") {
  const double m2 = 1.44 + c_alpha(0.75) * 0.09;
  CHECK(mom_error_predictor(0.75, 1.2, m2, 0.006 * m2) == Approx(0.2348).epsilon(1e-3));
  CHECK(mom_error_predictor(0.75, 1.2, m2, 0.0) == 0.0);
  CHECK(mom_error_predictor(1.0, 1.0, 2.0, 0.3) == Approx(0.3));
}

TEST_CASE("log-likelihood") {
  const VouParams p;
  const auto in = ou_input(5, p);
  CHECK(log_likelihood(0.0, 0.0, in, 0.3) == 0.0);
  const auto mle = mle_discrete(in);
  const double best = log_likelihood(mle.b_hat, mle.beta_hat, in, 0.3);
  NormalStream rng(17);
  for (int i = 0; i < 100; ++i) {
    CHECK(log_likelihood(p.b + rng(), p.beta + rng(), in, 0.3) <= best);
  }
  // grid search over 101 x 101 points. b and beta are strongly correlated, so "within one cell"
  // is measured in likelihood: the best node loses no more than a one-cell step from the MLE.
  const double h = 0.02;
  double top = -INFINITY;
  for (int i = -50; i <= 50; ++i) {
    for (int j = -50; j <= 50; ++j) top = std::max(top, log_likelihood(p.b + i * h, p.beta + j * h, in, 0.3));
  }
  double cell_drop = 0.0;
  for (double db : {-h, h}) {
    for (double dbeta : {-h, h}) {
      cell_drop = std::max(cell_drop, best - log_likelihood(mle.b_hat + db, mle.beta_hat + dbeta, in, 0.3));
    }
  }
  CHECK(top <= best);
  CHECK(best - top <= cell_drop);
}

TEST_CASE("MLE shift equivariance for K = 1") {
  const VouParams p;
  auto in = ou_input(9, p);
  const auto a = mle_discrete(in);
  for (double& v : in.x) v += 3.0;
  const auto b = mle_discrete(in);
  CHECK(b.beta_hat == Approx(a.beta_hat).epsilon(1e-8));
  CHECK(b.b_hat == Approx(a.b_hat - a.beta_hat * 3.0).epsilon(1e-8));
}

TEST_CASE("Fisher information") {
  const auto m = stationary_moments(KernelSpec::fractional(0.75), 1.2, -1.0, 0.3, 1.0);
  const auto f = fisher_information(m, 0.3);
  CHECK(f.determinant == Approx(m.m_var));
  CHECK(f.asymptotic_covariance[3] == Approx(0.09 / m.m_var));
  CHECK(f.asymptotic_covariance[0] == Approx(0.09 * m.m2 / m.m_var));
  const auto s = f.sqrt_matrix;
  CHECK(s[0] * s[0] + s[1] * s[2] == Approx(1.0));
  CHECK(s[2] * s[1] + s[3] * s[3] == Approx(m.m2));
  StationaryMoments zero{0.0, 2.0, 2.0, {}};
  const auto d = fisher_information(zero, 1.0);
  CHECK(d.matrix[1] == 0.0);
  CHECK(d.matrix[3] == 2.0);
}

TEST_CASE("partition planner") {
  PlanPolicy pol;
  pol.n = 1000;
  const auto one = plan_partition(KernelSpec::constant_one(), 200.0, 0.5, pol);
  CHECK(one.m == one.n);
  CHECK(one.condition_fine == 0.0);
  pol.threshold = 0.0;
  CHECK_THROWS_AS(plan_partition(KernelSpec::fractional(0.75), 200.0, 0.25, pol), PlanningError);
  pol.threshold = 0.1;
  CHECK_THROWS_AS(plan_partition(KernelSpec::fractional(0.75), 200.0, 0.25, pol), PlanningError);
  PlanPolicy small;
  small.n = 10;
  small.threshold = 1.0;
  const auto ok = plan_partition(KernelSpec::fractional(0.75), 1.0, 0.25, small);
  CHECK(ok.m % ok.n == 0);
  CHECK(ok.condition_fine < 1.0);
}
