#include "vou/acceptance.hpp"

#include <chrono>
#include <cmath>
#include <functional>
#include <sstream>

#include <Eigen/Dense>

#include "vou/error.hpp"
#include "vou/estimators.hpp"
#include "vou/grid.hpp"
#include "vou/first_kind.hpp"
#include "vou/harness.hpp"
#include "vou/kernel.hpp"
#include "vou/moments.hpp"
#include "vou/rng.hpp"
#include "vou/second_kind.hpp"
#include "vou/simulator.hpp"
#include "vou/transforms.hpp"

namespace vou {

namespace {

using nlohmann::json;

struct Check {
  bool ok = true;
  std::ostringstream detail;
  json metrics = json::object();

  void require(bool cond, const std::string& what) {
    if (!cond) {
      ok = false;
      if (detail.tellp() > 0) detail << "; ";
      detail << "FAILED " << what;
    }
  }
  void note(const std::string& s) {
    if (detail.tellp() > 0) detail << "; ";
    detail << s;
  }
};

std::string fmt(double x, int prec = 4) {
  std::ostringstream os;
  os.precision(prec);
  os << x;
  return os.str();
}

// E_{a,b}(z) by its power series; fine for |z| <= 2.
double mittag_leffler(double a, double b, double z) {
  double s = 0.0;
  for (int k = 0; k < 400; ++k) {
    double term = std::exp(k * std::log(std::abs(z)) - std::lgamma(a * k + b));
    if (z < 0.0 && (k % 2)) term = -term;
    if (z == 0.0) term = k == 0 ? 1.0 / std::tgamma(b) : 0.0;
    s += term;
    if (k > 10 && std::abs(term) < 1e-18 * std::abs(s)) break;
  }
  return s;
}

ExperimentConfig paper_scenario(const AcceptanceOptions& o) {
  ExperimentConfig c;
  c.kernel = KernelSpec::fractional(0.75);
  c.seed = o.seed;
  c.threads = o.threads;
  return c;
}

void criterion1(Check& c) {
  const std::vector<KernelSpec> kernels{KernelSpec::fractional(0.55),
                                        KernelSpec::fractional(0.75),
                                        KernelSpec::fractional(0.95),
                                        KernelSpec::log_kernel(),
                                        KernelSpec::exp_sum({1.0, 2.0}, {1.0, 2.0}),
                                        KernelSpec::damped_fractional(0.75, 1.0)};
  for (const auto& k : kernels) {
    const FirstKindResolvent L = first_kind_resolvent(k, 1e-3, 10.0);
    const double d = first_kind_identity_defect(L);
    c.metrics[k.name()] = d;
    c.require(d <= 1e-6, k.name() + " defect " + fmt(d));
  }
  if (c.ok) c.note("max |K*L - 1| <= 1e-6 for all six kernels");
}

void criterion2(Check& c) {
  {
    const SecondKindResolvent r(KernelSpec::constant_one(), -1.0, 1e-3, 10.0);
    double err = 0.0;
    for (std::size_t k = 0; k <= r.steps(); ++k) {
      err = std::max(err, std::abs(r.values()[k] - std::exp(-1.0 * k * 1e-3)));
    }
    c.metrics["exp_max_abs_error"] = err;
    c.require(err <= 1e-4, "K=1 max |E - e^(beta t)| = " + fmt(err));
    c.note("K=1 error " + fmt(err, 3));
  }
  for (double a : {0.55, 0.75, 0.95}) {
    const double dt = 1e-3;
    const SecondKindResolvent r(KernelSpec::fractional(a), -1.0, dt, 2.0);
    double rel = 0.0;
    for (std::size_t k = 1; k <= r.steps(); ++k) {
      const double t = dt * static_cast<double>(k);
      const double exact = std::pow(t, a - 1.0) * mittag_leffler(a, a, -std::pow(t, a));
      rel = std::max(rel, std::abs(r.values()[k] - exact) / std::abs(exact));
    }
    c.metrics["mittag_leffler_rel_error_" + fmt(a, 2)] = rel;
    c.require(rel <= 1e-3, "fractional " + fmt(a, 2) + " Mittag-Leffler relative error " + fmt(rel));
  }
  {
    const KernelSpec k = KernelSpec::exp_sum({1.0, 2.0}, {1.0, 2.0});
    const SecondKindResolvent r(k, -1.0, 1e-2, 60.0);
    const TailIntegrals ti = e_beta_tail_integrals(r);
    const double target = e_beta_integral_limit(k, -1.0);
    const double err = std::abs(ti.total() - target);
    c.metrics["expsum_integral"] = ti.total();
    c.require(err <= 1e-4, "exp-sum int E = " + fmt(ti.total(), 10) + " vs " + fmt(target, 10));
  }
  {
    const KernelSpec k = KernelSpec::fractional(0.75);
    const SecondKindResolvent r(k, -1.0, 1e-2, 200.0);
    const TailIntegrals ti = e_beta_tail_integrals(r);
    const double target = e_beta_integral_limit(k, -1.0);
    const double rel = std::abs(ti.total() - target) / target;
    c.metrics["fractional_integral"] = ti.total();
    c.metrics["fractional_integral_tail"] = ti.tail_integral;
    c.require(rel <= 0.02, "fractional int E = " + fmt(ti.total(), 6) + " vs " + fmt(target));
    c.note("fractional int E with tail " + fmt(ti.total(), 6));
  }
}

void criterion3(Check& c) {
  const double c1 = c_alpha(1.0);
  c.metrics["C_1"] = c1;
  c.require(std::abs(c1 - 0.5) <= 1e-6, "C_1 = " + fmt(c1, 12));
  const double ca = c_alpha(0.75);
  const SecondKindResolvent r(KernelSpec::fractional(0.75), -1.0, 1e-2, 200.0);
  const double grid = e_beta_tail_integrals(r).total_square();
  const double rel = std::abs(grid - ca) / ca;
  c.metrics["C_0.75"] = ca;
  c.metrics["grid_square_integral"] = grid;
  c.require(rel <= 0.01, "C_0.75 = " + fmt(ca, 8) + " vs grid " + fmt(grid, 8));
  c.note("C_0.75 " + fmt(ca, 8) + ", grid " + fmt(grid, 8) + " (" + fmt(100 * rel, 3) + "%)");
}

double round_trip_error(double dt, FirstKindMethod method) {
  const KernelSpec k = KernelSpec::fractional(0.75);
  const double horizon = 2.0;
  const std::size_t n = step_count(horizon, dt);
  PathOnGrid x{std::vector<double>(n + 1), dt, 1.0};
  for (std::size_t i = 0; i <= n; ++i) x.values[i] = std::sin(dt * static_cast<double>(i)) + 1.0;
  FirstKindOptions opts;
  opts.method = method;
  const FirstKindResolvent L = first_kind_resolvent(k, dt, horizon, opts);
  const PathOnGrid g = gamma_transform(z_transform(x, L), k);
  double err = 0.0;
  for (std::size_t i = 0; i <= n; ++i) err = std::max(err, std::abs(g.values[i] - (x.values[i] - x.x0)));
  return err;
}

void criterion4(Check& c) {
  const double gamma = KernelSpec::fractional(0.75).gamma();
  const double e_default = round_trip_error(1e-3, FirstKindMethod::Deconvolution);
  c.metrics["default_error"] = e_default;
  c.require(e_default <= 1e-2, "deconvolved round trip error " + fmt(e_default));
  std::vector<double> errs;
  for (double dt : {4e-3, 2e-3, 1e-3}) errs.push_back(round_trip_error(dt, FirstKindMethod::Analytic));
  const double slope = std::log(errs[0] / errs[2]) / std::log(4.0);
  c.metrics["analytic_errors"] = errs;
  c.metrics["analytic_slope"] = slope;
  c.require(errs[2] <= 1e-2, "analytic-L round trip error " + fmt(errs[2]));
  c.require(slope >= 0.8 * gamma, "refinement slope " + fmt(slope) + " < " + fmt(0.8 * gamma));
  c.note("deconvolved error " + fmt(e_default, 3) + ", analytic errors " + fmt(errs[0], 3) + "/" + fmt(errs[1], 3) +
         "/" + fmt(errs[2], 3) + ", slope " + fmt(slope, 3));
}

void criterion5(Check& c, const AcceptanceOptions& o) {
  const KernelSpec k = KernelSpec::constant_one();
  const VouParams p;
  const double horizon = 50.0, dt = 0.1;
  const std::size_t n = step_count(horizon, dt);
  const FirstKindResolvent L = first_kind_resolvent(k, dt, horizon);
  double worst = 0.0;
  for (std::size_t i = 0; i < 50; ++i) {
    const SamplePath path = simulate_euler(k, p, n, horizon, path_seed(o.seed, i));
    const EstimationInput in = prepare_estimation(path, L, 1);
    // Textbook OU: weighted least squares of dX on (1, X) dt.
    double sx = 0.0, sxx = 0.0, sxd = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      const double x = path.values[j], dx = path.values[j + 1] - path.values[j];
      sx += x * dt;
      sxx += x * x * dt;
      sxd += x * dx;
    }
    const double dx_total = path.values[n] - path.values[0];
    Eigen::Matrix2d a;
    a << horizon, sx, sx, sxx;
    const Eigen::Vector2d theta = a.ldlt().solve(Eigen::Vector2d(dx_total, sxd));
    const double b_known_beta = (dx_total - p.beta * sx) / horizon;
    const double beta_known_b = (sxd - p.b * sx) / sxx;
    double m1 = 0.0, m2 = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      m1 += path.values[j];
      m2 += path.values[j] * path.values[j];
    }
    m1 /= static_cast<double>(n);
    m2 /= static_cast<double>(n);
    const double kappa = p.sigma * p.sigma / (2.0 * (m2 - m1 * m1));

    auto diff = [](double a, double b) { return std::abs(a - b) / std::max(1.0, std::abs(b)); };
    const DriftEstimate mle = mle_discrete(in);
    const DriftEstimate kb = mle_known_beta(in, p.beta);
    const DriftEstimate kbb = mle_known_b(in, p.b);
    const DriftEstimate mom = method_of_moments(in.x, dt, 1.0, p.sigma);
    worst = std::max({worst, diff(mle.b_hat, theta(0)), diff(mle.beta_hat, theta(1)), diff(kb.b_hat, b_known_beta),
                      diff(kbb.beta_hat, beta_known_b), diff(mom.beta_hat, -kappa), diff(mom.b_hat, m1 * kappa)});
  }
  c.metrics["max_relative_difference"] = worst;
  c.require(worst <= 1e-10, "largest difference to the OU oracle " + fmt(worst));
  c.note("50 paths, four estimators, max difference " + fmt(worst, 3));
}

const json& find_row(const ExperimentReport& r, const std::function<bool(const json&)>& pred) {
  for (const auto& row : r.rows) {
    if (pred(row)) return row;
  }
  throw NumericalError("report row not found");
}

void criterion6(Check& c, const AcceptanceOptions& o) {
  ExperimentConfig cfg = paper_scenario(o);
  cfg.scheme = Scheme::Euler;
  cfg.horizons = {500.0};
  cfg.dts = {0.5};
  cfg.n_paths = 200;
  const ExperimentReport r = run_lln(cfg);
  const json& row = r.rows.front();
  const double d1 = row["rel_dev_m1"], d2 = row["rel_dev_m2"];
  c.metrics["row"] = row;
  c.require(d1 <= 0.01, "m1 relative deviation " + fmt(d1));
  c.require(d2 <= 0.015, "m2 relative deviation " + fmt(d2));
  c.note("m1 " + fmt(row["mean_m1"].get<double>(), 6) + " (" + fmt(100 * d1, 3) + "%), m2 " +
         fmt(row["mean_m2"].get<double>(), 6) + " vs " + fmt(row["target_m2"].get<double>(), 6) + " (" +
         fmt(100 * d2, 3) + "%)");
}

void criterion7(Check& c, const AcceptanceOptions& o) {
  ExperimentConfig cfg = paper_scenario(o);
  cfg.scheme = Scheme::Euler;
  cfg.horizons = {500.0};
  cfg.dts = {0.5};
  cfg.n_paths = 200;
  cfg.estimators = {EstimatorMethod::MoM};
  const ExperimentReport r = run_estimator_convergence(cfg);
  const json& row = r.rows.front();
  const double err = row["rel_err_beta"];
  c.metrics["row"] = row;
  c.require(err >= 0.10 && err <= 0.40, "MoM beta relative error " + fmt(err));
  const StationaryMoments m = stationary_moments(cfg.kernel, 1.2, -1.0, 0.3, 1.0);
  const double pred = mom_error_predictor(0.75, m.m1, m.m2, 0.006 * m.m2);
  c.metrics["predictor"] = pred;
  c.require(std::abs(pred - 0.2348) <= 0.001, "predictor " + fmt(pred));
  c.note("MoM beta error " + fmt(100 * err, 4) + "% (mean abs " +
         fmt(100 * row["mean_abs_rel_err_beta"].get<double>(), 4) + "%), predictor " + fmt(100 * pred, 5) + "%");
}

void criterion8(Check& c, const AcceptanceOptions& o) {
  const std::vector<KernelSpec> kernels{KernelSpec::fractional(0.75), KernelSpec::log_kernel(),
                                        KernelSpec::exp_sum({1.0, 2.0}, {1.0, 2.0})};
  for (const auto& k : kernels) {
    ExperimentConfig cfg = paper_scenario(o);
    cfg.kernel = k;
    cfg.scheme = Scheme::Euler;
    cfg.horizons = {200.0};
    cfg.dts = {0.2, 0.5, 1.0};
    cfg.n_paths = 200;
    const ExperimentReport r = run_estimator_convergence(cfg);
    const json& row = find_row(r, [](const json& j) { return j["dt"] == 0.2; });
    const double eb = row["rel_err_b"], et = row["rel_err_beta"];
    c.require(eb <= 0.05 && et <= 0.05, k.name() + " relative errors b " + fmt(eb) + ", beta " + fmt(et));
    std::vector<double> ab, at;
    for (const auto& x : r.rows) {
      ab.push_back(x["mean_abs_rel_err_b"]);
      at.push_back(x["mean_abs_rel_err_beta"]);
    }
    const double rb = *std::max_element(ab.begin(), ab.end()) / *std::min_element(ab.begin(), ab.end());
    const double rt = *std::max_element(at.begin(), at.end()) / *std::min_element(at.begin(), at.end());
    c.require(rb <= 2.0 && rt <= 2.0, k.name() + " dt spread b " + fmt(rb) + ", beta " + fmt(rt));
    c.metrics[k.name()] = {{"rows", r.rows}, {"spread_b", rb}, {"spread_beta", rt}};
    c.note(k.name() + ": b " + fmt(100 * eb, 3) + "%, beta " + fmt(100 * et, 3) + "%, spread " + fmt(rb, 3) + "/" +
           fmt(rt, 3));
  }
}

ExperimentConfig normality_scenario(const AcceptanceOptions& o) {
  ExperimentConfig cfg = paper_scenario(o);
  cfg.scheme = Scheme::EulerProduct;
  cfg.horizons = {200.0};
  cfg.dts = {0.2};
  cfg.n_paths = 2000;
  cfg.estimators = {EstimatorMethod::MLE, EstimatorMethod::MLEKnownB, EstimatorMethod::MLEKnownBeta};
  return cfg;
}

void criterion9(Check& c, const AcceptanceOptions& o) {
  const ExperimentReport r = run_normality(normality_scenario(o));
  const json& s = r.summary;
  const double p1 = s["ks"]["u1"]["p_value"], p2 = s["ks"]["u2"]["p_value"];
  const double dev = s["covariance"]["max_relative_deviation"];
  c.metrics = {{"ks", s["ks"]}, {"covariance", s["covariance"]}, {"failures", s["failures"]}};
  c.require(p1 >= 0.01, "KS p-value coordinate 1 " + fmt(p1));
  c.require(p2 >= 0.01, "KS p-value coordinate 2 " + fmt(p2));
  c.require(dev <= 0.2, "covariance deviation " + fmt(dev));
  c.note("KS p " + fmt(p1, 3) + "/" + fmt(p2, 3) + ", covariance deviation " + fmt(100 * dev, 3) + "%");
}

void criterion10(Check& c, const AcceptanceOptions& o) {
  const ExperimentReport r = run_normality(normality_scenario(o));
  const json& kb = r.summary["known_beta"];
  const json& kt = r.summary["known_b"];
  const double d1 = kb["relative_deviation"], d2 = kt["relative_deviation"];
  c.metrics = {{"known_beta", kb}, {"known_b", kt}};
  c.require(d1 <= 0.2, "Var sqrt(T)(b_hat - b) " + fmt(kb["variance"].get<double>()) + " vs " +
                           fmt(kb["target"].get<double>()));
  c.require(d2 <= 0.2, "Var sqrt(T)(beta_hat - beta) " + fmt(kt["variance"].get<double>()) + " vs " +
                           fmt(kt["target"].get<double>()));
  c.note("known beta: " + fmt(kb["variance"].get<double>()) + " vs " + fmt(kb["target"].get<double>()) +
         ", known b: " + fmt(kt["variance"].get<double>()) + " vs " + fmt(kt["target"].get<double>()));
}

void criterion11(Check& c) {
  PlanPolicy policy;
  policy.n = 1000;
  const KernelSpec one = KernelSpec::constant_one();
  const PartitionPlan p1 = plan_partition(one, 200.0, one.gamma(), policy);
  c.metrics["constant_kernel"] = {{"n", p1.n}, {"m", p1.m}};
  c.require(p1.m == p1.n, "K=1 gave m = " + std::to_string(p1.m));
  const KernelSpec k = KernelSpec::fractional(0.75);
  try {
    const PartitionPlan p = plan_partition(k, 200.0, k.gamma(), policy);
    c.metrics["fractional"] = {{"n", p.n},
                               {"m", p.m},
                               {"condition_coarse", p.condition_coarse},
                               {"condition_fine", p.condition_fine}};
    c.require(p.condition_coarse < 0.1, "coarse condition " + fmt(p.condition_coarse));
    c.require(p.condition_fine < 0.1, "fine condition " + fmt(p.condition_fine));
  } catch (const PlanningError& e) {
    c.require(false, std::string("fractional plan: ") + e.what());
  }
}

}  // namespace

Suite suite_from_string(const std::string& name) {
  if (name == "full") return Suite::Full;
  if (name == "fast") return Suite::Fast;
  throw ValidationError("suite: expected 'full' or 'fast', got '" + name + "'");
}

std::vector<int> suite_criteria(Suite suite) {
  if (suite == Suite::Fast) return {1, 2, 3, 4, 5, 11};
  std::vector<int> all;
  for (int i = 1; i <= kCriterionCount; ++i) all.push_back(i);
  return all;
}

CriterionResult run_criterion(int id, const AcceptanceOptions& options) {
  static const char* names[] = {"",
                                "first-kind resolvent identity",
                                "second-kind resolvent oracles",
                                "C_alpha constant",
                                "Gamma(Z(x)) round trip",
                                "classical OU oracle",
                                "law of large numbers",
                                "method of moments error band",
                                "MLE convergence",
                                "asymptotic normality",
                                "known-parameter variances",
                                "mesh-condition planner"};
  if (id < 1 || id > kCriterionCount) {
    throw ValidationError("criterion id must be in 1.." + std::to_string(kCriterionCount));
  }
  CriterionResult r;
  r.id = id;
  r.name = names[id];
  Check c;
  const auto start = std::chrono::steady_clock::now();
  try {
    switch (id) {
      case 1: criterion1(c); break;
      case 2: criterion2(c); break;
      case 3: criterion3(c); break;
      case 4: criterion4(c); break;
      case 5: criterion5(c, options); break;
      case 6: criterion6(c, options); break;
      case 7: criterion7(c, options); break;
      case 8: criterion8(c, options); break;
      case 9: criterion9(c, options); break;
      case 10: criterion10(c, options); break;
      case 11: criterion11(c); break;
    }
  } catch (const std::exception& e) {
    c.require(false, std::string("exception: ") + e.what());
  }
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  r.passed = c.ok;
  r.detail = c.detail.str();
  r.metrics = std::move(c.metrics);
  return r;
}

std::vector<CriterionResult> run_acceptance(const std::vector<int>& ids, const AcceptanceOptions& options) {
  std::vector<CriterionResult> out;
  for (int id : ids) out.push_back(run_criterion(id, options));
  return out;
}

std::string format_result_line(const CriterionResult& r) {
  std::ostringstream os;
  os << (r.passed ? "[PASS] " : "[FAIL] ") << r.id << " " << r.name << " (" << fmt(r.seconds, 3) << " s): " << r.detail;
  return os.str();
}

json acceptance_json(const std::vector<CriterionResult>& results, const AcceptanceOptions& options) {
  json out;
  out["seed"] = options.seed;
  json list = json::array();
  bool all = true;
  for (const auto& r : results) {
    all = all && r.passed;
    list.push_back({{"id", r.id},
                    {"name", r.name},
                    {"passed", r.passed},
                    {"detail", r.detail},
                    {"metrics", r.metrics}});
  }
  out["criteria"] = list;
  out["all_passed"] = all;
  return out;
}

}  // namespace vou
