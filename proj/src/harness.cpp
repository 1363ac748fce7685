#include "vou/harness.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <optional>
#include <sstream>

#include "vou/error.hpp"
#include "vou/grid.hpp"
#include "vou/moments.hpp"
#include "vou/rng.hpp"
#include "vou/second_kind.hpp"
#include "vou/stats.hpp"
#include "vou/transforms.hpp"

namespace vou {

namespace {

using nlohmann::json;

constexpr const char* kSeedRule = "path_seed(seed, i) = splitmix64(seed + 0x9e3779b97f4a7c15 * (i + 1))";

double nan() { return std::numeric_limits<double>::quiet_NaN(); }

// Relative error, absolute when the target is zero.
double relative(double value, double target) {
  const double d = std::abs(value - target);
  return target != 0.0 ? d / std::abs(target) : d;
}

std::size_t steps_or_throw(double horizon, double dt, const char* what) {
  try {
    return step_count(horizon, dt);
  } catch (const std::exception& e) {
    std::ostringstream os;
    os << what << ": T = " << horizon << " is not a multiple of dt = " << dt;
    throw ValidationError(os.str());
  }
}

std::vector<VouParams> params_list(const ExperimentConfig& config) {
  if (config.parameter_grid.empty()) return {config.params};
  std::vector<VouParams> out;
  for (const auto& [b, beta] : config.parameter_grid) {
    VouParams p = config.params;
    p.b = b;
    p.beta = beta;
    out.push_back(p);
  }
  return out;
}

double elapsed(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

json provenance(const ExperimentConfig& config) {
  json j;
  j["seed"] = config.seed;
  j["seed_rule"] = kSeedRule;
  j["n_paths"] = config.n_paths;
  j["scheme"] = to_string(config.scheme);
  json k;
  to_json(k, config.kernel);
  j["kernel"] = k;
  return j;
}

// Whole-path transforms; any horizon on the coarse grid is read off as a prefix.
struct Observed {
  std::vector<double> x;         // coarse grid
  std::vector<double> z_fine;    // Z^{P_m} at coarse points
  std::vector<double> z_coarse;  // Z^{P_n} at coarse points
  double dt = 0.0;
  std::size_t stride = 1;
  double x0 = 0.0;
};

Observed observe(const SamplePath& fine, const PathBatch& batch) {
  Observed o;
  o.stride = batch.stride();
  EstimationInput full = prepare_estimation(fine, batch.first_kind(), o.stride);
  o.x = std::move(full.x);
  o.z_fine = std::move(full.z_fine);
  o.dt = full.grid_step();
  o.x0 = fine.x0;
  PathOnGrid coarse{o.x, o.dt, fine.x0};
  o.z_coarse = z_transform(coarse, batch.first_kind()).values;
  return o;
}

EstimationInput slice(const Observed& o, std::size_t k) {
  EstimationInput in;
  in.x.assign(o.x.begin(), o.x.begin() + static_cast<std::ptrdiff_t>(k + 1));
  in.z_fine.assign(o.z_fine.begin(), o.z_fine.begin() + static_cast<std::ptrdiff_t>(k + 1));
  in.z_coarse_terminal = o.z_coarse[k];
  in.n = k;
  in.m = k * o.stride;
  in.horizon = o.dt * static_cast<double>(k);
  return in;
}

std::optional<DriftEstimate> estimate(EstimatorMethod method, const Observed& o, std::size_t k,
                                      const ExperimentConfig& config, const VouParams& p) {
  const MleOptions mo{config.fine_terminal};
  try {
    switch (method) {
      case EstimatorMethod::MLE:
        return mle_discrete(slice(o, k), mo);
      case EstimatorMethod::MLEKnownBeta:
        return mle_known_beta(slice(o, k), p.beta, mo);
      case EstimatorMethod::MLEKnownB:
        return mle_known_b(slice(o, k), p.b);
      case EstimatorMethod::MoM: {
        std::vector<double> x(o.x.begin(), o.x.begin() + static_cast<std::ptrdiff_t>(k + 1));
        return method_of_moments(x, o.dt, config.kernel.alpha(), p.sigma);
      }
    }
  } catch (const DegenerateError&) {
  }
  return std::nullopt;
}

StationaryMoments targets(const ExperimentConfig& config, const VouParams& p) {
  return stationary_moments(config.kernel, p.b, p.beta, p.sigma, p.x0);
}

double max_horizon(const ExperimentConfig& config) { return config.horizons.back(); }


}  // namespace

void ExperimentConfig::validate() const {
  if (n_paths < 2) throw ValidationError("n_paths: need at least 2 paths");
  if (horizons.empty()) throw ValidationError("horizons: list is empty");
  for (std::size_t i = 0; i < horizons.size(); ++i) {
    if (!(horizons[i] > 0.0)) throw ValidationError("horizons: entries must be positive");
    if (i > 0 && !(horizons[i] > horizons[i - 1])) throw ValidationError("horizons: must be strictly increasing");
  }
  if (dts.empty()) throw ValidationError("dt: list is empty");
  for (double dt : dts) {
    if (!(dt > 0.0)) throw ValidationError("dt: entries must be positive");
    for (double t : horizons) steps_or_throw(t, dt, "dt");
  }
  if (fine_factor < 1) throw ValidationError("fine_factor: must be at least 1");
  if (resolvent_refinement < 1) throw ValidationError("resolvent_refinement: must be at least 1");
  auto check_params = [](const VouParams& p, const std::string& where) {
    if (!std::isfinite(p.b)) throw ValidationError(where + "b: must be finite");
    if (!std::isfinite(p.x0)) throw ValidationError(where + "x0: must be finite");
    if (!(p.beta < 0.0)) throw ValidationError(where + "beta: must be negative");
    if (!(p.sigma > 0.0) || !std::isfinite(p.sigma)) throw ValidationError(where + "sigma: must be positive");
  };
  check_params(params, "params.");
  for (const auto& [b, beta] : parameter_grid) {
    VouParams p = params;
    p.b = b;
    p.beta = beta;
    check_params(p, "parameter_grid.");
  }
  if (estimators.empty()) throw ValidationError("estimators: list is empty");
  for (EstimatorMethod e : estimators) {
    if (e == EstimatorMethod::MoM &&
        !(kernel.kind() == KernelKind::Fractional && kernel.alpha() > 0.5 && kernel.alpha() <= 1.0)) {
      throw ValidationError("estimators: mom needs a fractional kernel with alpha in (1/2, 1]");
    }
  }
  for (double h : lags) {
    if (!(h >= 0.0)) throw ValidationError("lags: entries must be non-negative");
  }
  if (!(burn_in < 0.0 || std::isfinite(burn_in))) throw ValidationError("burn_in: must be finite");
}

FirstKindOptions first_kind_options_for(Scheme scheme) {
  FirstKindOptions o;
  o.rule = scheme == Scheme::Euler ? ResolventRule::PointValues : ResolventRule::ProductIntegration;
  o.atom_on_weights = scheme == Scheme::EulerProduct;
  return o;
}

std::size_t effective_threads(std::size_t requested) {
  if (requested > 0) return requested;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : hw;
}

PathBatch::PathBatch(const ExperimentConfig& config, const VouParams& params, double horizon, double dt,
                     bool retain_noise)
    : seed_(config.seed),
      stride_(config.fine_factor),
      fine_dt_(dt / static_cast<double>(config.fine_factor)),
      first_kind_(first_kind_resolvent(config.kernel, dt / static_cast<double>(config.fine_factor), horizon,
                                       first_kind_options_for(config.scheme))) {
  const std::size_t m = steps_or_throw(horizon, fine_dt_, "fine grid");
  const KernelSpec& kernel = config.kernel;
  SimulationOptions opts;
  opts.retain_noise = retain_noise;
  switch (config.scheme) {
    case Scheme::Euler:
    case Scheme::EulerProduct: {
      opts.euler_rule =
          config.scheme == Scheme::Euler ? ResolventRule::PointValues : ResolventRule::ProductIntegration;
      auto sim = std::make_shared<EulerSimulator>(kernel, params, m, horizon, opts);
      simulate_ = [sim](std::uint64_t s) { return sim->simulate(s); };
      break;
    }
    case Scheme::Resolvent:
    case Scheme::ExactCholesky: {
      const double rdt = fine_dt_ / static_cast<double>(config.resolvent_refinement);
      resolvent_ = std::make_shared<SecondKindResolvent>(kernel, params.beta, rdt, horizon);
      if (config.scheme == Scheme::Resolvent) {
        auto sim = std::make_shared<ResolventSimulator>(*resolvent_, params, m, horizon, opts);
        simulate_ = [sim](std::uint64_t s) { return sim->simulate(s); };
      } else {
        auto sim = std::make_shared<CholeskySampler>(*resolvent_, params, m, horizon, opts);
        if (sim->jitter() > 0.0) warning_ = "covariance needed diagonal jitter " + std::to_string(sim->jitter());
        simulate_ = [sim](std::uint64_t s) { return sim->simulate(s); };
      }
      break;
    }
    case Scheme::Stationary: {
      const double rdt = fine_dt_ / static_cast<double>(config.resolvent_refinement);
      const double extra = kernel.kind() == KernelKind::ExpSum ? 50.0 / std::abs(params.beta) : 100.0;
      const double rh = fine_dt_ * std::ceil((horizon + extra) / fine_dt_ - 1e-9);
      resolvent_ = std::make_shared<SecondKindResolvent>(kernel, params.beta, rdt, rh);
      auto sim = std::make_shared<StationarySimulator>(*resolvent_, params, m, horizon, config.burn_in, opts);
      warning_ = sim->warning();
      simulate_ = [sim](std::uint64_t s) { return sim->simulate(s); };
      break;
    }
  }
}

SamplePath PathBatch::simulate(std::size_t index) const { return simulate_(path_seed(seed_, index)); }

ExperimentReport run_lln(const ExperimentConfig& config) {
  config.validate();
  const auto start = std::chrono::steady_clock::now();
  ExperimentReport r;
  r.experiment = "lln";
  r.columns = {"b",       "beta",    "T",         "dt",      "n_paths",   "mean_m1", "sd_m1",
               "se_m1",   "target_m1", "rel_dev_m1", "l2_dev_m1", "mean_m2", "sd_m2",   "se_m2",
               "target_m2", "rel_dev_m2", "l2_dev_m2", "seed",   "seed_rule"};
  json warnings = json::array();
  for (const VouParams& p : params_list(config)) {
    const StationaryMoments tgt = targets(config, p);
    for (double dt : config.dts) {
      PathBatch batch(config, p, max_horizon(config), dt);
      if (!batch.warning().empty()) warnings.push_back(batch.warning());
      std::vector<std::size_t> ks;
      for (double t : config.horizons) ks.push_back(steps_or_throw(t, dt, "horizons"));
      const std::size_t stride = batch.stride();
      auto per_path = parallel_map<std::vector<TimeAverages>>(
          config.n_paths, config.threads, [&](std::size_t i) {
            const SamplePath fine = batch.simulate(i);
            std::vector<double> x(fine.steps() / stride + 1);
            for (std::size_t k = 0; k < x.size(); ++k) x[k] = fine.values[k * stride];
            std::vector<TimeAverages> out;
            for (std::size_t k : ks) {
              out.push_back(time_averages({x.begin(), x.begin() + static_cast<std::ptrdiff_t>(k + 1)}));
            }
            return out;
          });
      for (std::size_t h = 0; h < ks.size(); ++h) {
        std::vector<double> m1(config.n_paths), m2(config.n_paths);
        double l2_1 = 0.0, l2_2 = 0.0;
        for (std::size_t i = 0; i < config.n_paths; ++i) {
          m1[i] = per_path[i][h].m1;
          m2[i] = per_path[i][h].m2;
          l2_1 += (m1[i] - tgt.m1) * (m1[i] - tgt.m1);
          l2_2 += (m2[i] - tgt.m2) * (m2[i] - tgt.m2);
        }
        const Summary s1 = summarize(m1), s2 = summarize(m2);
        const double nn = static_cast<double>(config.n_paths);
        r.rows.push_back({{"b", p.b},
                          {"beta", p.beta},
                          {"T", config.horizons[h]},
                          {"dt", dt},
                          {"n_paths", config.n_paths},
                          {"mean_m1", s1.mean},
                          {"sd_m1", s1.sd},
                          {"se_m1", s1.se},
                          {"target_m1", tgt.m1},
                          {"rel_dev_m1", relative(s1.mean, tgt.m1)},
                          {"l2_dev_m1", std::sqrt(l2_1 / nn)},
                          {"mean_m2", s2.mean},
                          {"sd_m2", s2.sd},
                          {"se_m2", s2.se},
                          {"target_m2", tgt.m2},
                          {"rel_dev_m2", relative(s2.mean, tgt.m2)},
                          {"l2_dev_m2", std::sqrt(l2_2 / nn)},
                          {"seed", config.seed},
                          {"seed_rule", kSeedRule}});
      }
    }
  }
  r.summary["provenance"] = provenance(config);
  r.summary["warnings"] = warnings;
  r.summary["runtime_seconds"] = elapsed(start);
  return r;
}

ExperimentReport run_estimator_convergence(const ExperimentConfig& config) {
  config.validate();
  const auto start = std::chrono::steady_clock::now();
  ExperimentReport r;
  r.experiment = "estimator_convergence";
  r.columns = {"b",          "beta",       "T",          "dt",
               "estimator",  "n",          "m",          "n_paths",
               "failures",   "mean_b_hat", "sd_b_hat",   "se_b_hat",
               "mean_beta_hat", "sd_beta_hat", "se_beta_hat", "rel_err_b",
               "rel_err_beta", "mean_abs_rel_err_b", "mean_abs_rel_err_beta", "mean_m1",
               "se_m1",      "mean_m2",    "se_m2",      "seed",
               "seed_rule"};
  const std::size_t ne = config.estimators.size();
  json warnings = json::array();
  json predictor = json::array();
  for (const VouParams& p : params_list(config)) {
    const StationaryMoments tgt = targets(config, p);
    for (double dt : config.dts) {
      PathBatch batch(config, p, max_horizon(config), dt);
      if (!batch.warning().empty()) warnings.push_back(batch.warning());
      std::vector<std::size_t> ks;
      for (double t : config.horizons) ks.push_back(steps_or_throw(t, dt, "horizons"));

      struct PerPath {
        std::vector<std::optional<DriftEstimate>> est;  // [h * ne + e]
        std::vector<TimeAverages> avg;
      };
      auto per_path = parallel_map<PerPath>(config.n_paths, config.threads, [&](std::size_t i) {
        const SamplePath fine = batch.simulate(i);
        const Observed o = observe(fine, batch);
        PerPath out;
        for (std::size_t k : ks) {
          for (EstimatorMethod e : config.estimators) out.est.push_back(estimate(e, o, k, config, p));
          out.avg.push_back(time_averages({o.x.begin(), o.x.begin() + static_cast<std::ptrdiff_t>(k + 1)}));
        }
        return out;
      });

      for (std::size_t h = 0; h < ks.size(); ++h) {
        std::vector<double> m1(config.n_paths), m2(config.n_paths);
        for (std::size_t i = 0; i < config.n_paths; ++i) {
          m1[i] = per_path[i].avg[h].m1;
          m2[i] = per_path[i].avg[h].m2;
        }
        const Summary s1 = summarize(m1), s2 = summarize(m2);
        for (std::size_t e = 0; e < ne; ++e) {
          std::vector<double> bh, th;
          double abs_b = 0.0, abs_t = 0.0;
          std::size_t failures = 0;
          for (std::size_t i = 0; i < config.n_paths; ++i) {
            const auto& est = per_path[i].est[h * ne + e];
            if (!est) {
              ++failures;
              continue;
            }
            bh.push_back(est->b_hat);
            th.push_back(est->beta_hat);
            abs_b += relative(est->b_hat, p.b);
            abs_t += relative(est->beta_hat, p.beta);
          }
          const std::size_t ok = bh.size();
          const Summary sb = ok >= 2 ? summarize(bh) : Summary{nan(), nan(), nan(), ok};
          const Summary st = ok >= 2 ? summarize(th) : Summary{nan(), nan(), nan(), ok};
          const double dok = static_cast<double>(ok);
          r.rows.push_back({{"b", p.b},
                            {"beta", p.beta},
                            {"T", config.horizons[h]},
                            {"dt", dt},
                            {"estimator", to_string(config.estimators[e])},
                            {"n", ks[h]},
                            {"m", ks[h] * batch.stride()},
                            {"n_paths", config.n_paths},
                            {"failures", failures},
                            {"mean_b_hat", sb.mean},
                            {"sd_b_hat", sb.sd},
                            {"se_b_hat", sb.se},
                            {"mean_beta_hat", st.mean},
                            {"sd_beta_hat", st.sd},
                            {"se_beta_hat", st.se},
                            {"rel_err_b", relative(sb.mean, p.b)},
                            {"rel_err_beta", relative(st.mean, p.beta)},
                            {"mean_abs_rel_err_b", ok ? abs_b / dok : nan()},
                            {"mean_abs_rel_err_beta", ok ? abs_t / dok : nan()},
                            {"mean_m1", s1.mean},
                            {"se_m1", s1.se},
                            {"mean_m2", s2.mean},
                            {"se_m2", s2.se},
                            {"seed", config.seed},
                            {"seed_rule", kSeedRule}});
        }
        if (config.kernel.kind() == KernelKind::Fractional && config.kernel.alpha() > 0.5) {
          const double a = config.kernel.alpha();
          const double observed = std::abs(s2.mean - tgt.m2);
          predictor.push_back({{"b", p.b},
                               {"beta", p.beta},
                               {"T", config.horizons[h]},
                               {"dt", dt},
                               {"delta_observed", observed},
                               {"prediction_observed", mom_error_predictor(a, tgt.m1, tgt.m2, observed)},
                               {"delta_reference", 0.006 * tgt.m2},
                               {"prediction_reference", mom_error_predictor(a, tgt.m1, tgt.m2, 0.006 * tgt.m2)}});
        }
      }
    }
  }

  // MLE terminal errors across dt at each horizon.
  json robustness = json::array();
  for (const VouParams& p : params_list(config)) {
    for (double t : config.horizons) {
      for (EstimatorMethod e : config.estimators) {
        double lo_b = INFINITY, hi_b = 0.0, lo_t = INFINITY, hi_t = 0.0;
        for (const json& row : r.rows) {
          if (row["b"] != p.b || row["beta"] != p.beta || row["T"] != t || row["estimator"] != to_string(e)) continue;
          const double eb = row["mean_abs_rel_err_b"].is_number() ? row["mean_abs_rel_err_b"].get<double>() : nan();
          const auto& cell = row["mean_abs_rel_err_beta"];
          const double et = cell.is_number() ? cell.get<double>() : nan();
          lo_b = std::min(lo_b, eb);
          hi_b = std::max(hi_b, eb);
          lo_t = std::min(lo_t, et);
          hi_t = std::max(hi_t, et);
        }
        robustness.push_back({{"b", p.b},
                              {"beta", p.beta},
                              {"T", t},
                              {"estimator", to_string(e)},
                              {"ratio_b", lo_b > 0.0 ? hi_b / lo_b : nan()},
                              {"ratio_beta", lo_t > 0.0 ? hi_t / lo_t : nan()}});
      }
    }
  }
  r.summary["provenance"] = provenance(config);
  r.summary["dt_robustness"] = robustness;
  if (!predictor.empty()) r.summary["mom_predictor"] = predictor;
  r.summary["warnings"] = warnings;
  r.summary["runtime_seconds"] = elapsed(start);
  return r;
}

ExperimentReport run_normality(const ExperimentConfig& config) {
  config.validate();
  if (config.n_paths < 500) throw ValidationError("n_paths: the normality study needs at least 500 paths");
  const auto start = std::chrono::steady_clock::now();
  const VouParams& p = config.params;
  const double t = config.horizons.front();
  const double dt = config.dts.front();
  const std::size_t k = steps_or_throw(t, dt, "horizons");
  const StationaryMoments tgt = targets(config, p);
  const FisherInformation fisher = fisher_information(tgt, p.sigma);
  const auto& s = fisher.sqrt_matrix;
  const auto& c = fisher.asymptotic_covariance;

  PathBatch batch(config, p, t, dt);
  struct PerPath {
    std::optional<DriftEstimate> mle, known_beta, known_b;
  };
  auto per_path = parallel_map<PerPath>(config.n_paths, config.threads, [&](std::size_t i) {
    const Observed o = observe(batch.simulate(i), batch);
    return PerPath{estimate(EstimatorMethod::MLE, o, k, config, p),
                   estimate(EstimatorMethod::MLEKnownBeta, o, k, config, p),
                   estimate(EstimatorMethod::MLEKnownB, o, k, config, p)};
  });

  ExperimentReport r;
  r.experiment = "normality";
  r.columns = {"path", "seed", "b_hat", "beta_hat", "y_b", "y_beta", "u1", "u2", "b_hat_known_beta",
               "beta_hat_known_b"};
  const double rt = std::sqrt(t);
  std::vector<double> yb, yt, u1, u2, kb, kt;
  std::size_t failures = 0;
  for (std::size_t i = 0; i < config.n_paths; ++i) {
    const PerPath& pp = per_path[i];
    json row{{"path", i}, {"seed", path_seed(config.seed, i)}};
    if (pp.mle) {
      const double a = rt * (pp.mle->b_hat - p.b), b = rt * (pp.mle->beta_hat - p.beta);
      yb.push_back(a);
      yt.push_back(b);
      u1.push_back((s[0] * a + s[1] * b) / p.sigma);
      u2.push_back((s[2] * a + s[3] * b) / p.sigma);
      row.update({{"b_hat", pp.mle->b_hat}, {"beta_hat", pp.mle->beta_hat}, {"y_b", a}, {"y_beta", b},
                  {"u1", u1.back()}, {"u2", u2.back()}});
    } else {
      ++failures;
      row.update({{"b_hat", nullptr}, {"beta_hat", nullptr}, {"y_b", nullptr}, {"y_beta", nullptr}, {"u1", nullptr},
                  {"u2", nullptr}});
    }
    row["b_hat_known_beta"] = pp.known_beta ? json(pp.known_beta->b_hat) : json(nullptr);
    row["beta_hat_known_b"] = pp.known_b ? json(pp.known_b->beta_hat) : json(nullptr);
    if (pp.known_beta) kb.push_back(rt * (pp.known_beta->b_hat - p.b));
    if (pp.known_b) kt.push_back(rt * (pp.known_b->beta_hat - p.beta));
    r.rows.push_back(std::move(row));
  }
  if (yb.size() < 2) throw DegenerateError("normality study: fewer than two non-degenerate paths");

  const KsResult ks1 = ks_test_standard_normal(u1), ks2 = ks_test_standard_normal(u2);
  const double cbb = sample_covariance(yb, yb), cbt = sample_covariance(yb, yt), ctt = sample_covariance(yt, yt);
  const double scale_bb = c[0], scale_bt = std::sqrt(c[0] * c[3]), scale_tt = c[3];
  const double dev_bb = std::abs(cbb - c[0]) / scale_bb;
  const double dev_bt = std::abs(cbt - c[1]) / scale_bt;
  const double dev_tt = std::abs(ctt - c[3]) / scale_tt;
  const double var_kb = sample_covariance(kb, kb), var_kt = sample_covariance(kt, kt);
  const double target_kb = p.sigma * p.sigma, target_kt = p.sigma * p.sigma / tgt.m2;

  json& sm = r.summary;
  sm["provenance"] = provenance(config);
  sm["T"] = t;
  sm["dt"] = dt;
  sm["failures"] = failures;
  sm["stationary"] = {{"m1", tgt.m1}, {"m2", tgt.m2}, {"m_var", tgt.m_var}};
  sm["ks"] = {{"u1", {{"statistic", ks1.statistic}, {"p_value", ks1.p_value}, {"n", ks1.n}}},
              {"u2", {{"statistic", ks2.statistic}, {"p_value", ks2.p_value}, {"n", ks2.n}}}};
  sm["covariance"] = {{"empirical", {cbb, cbt, cbt, ctt}},
                      {"target", {c[0], c[1], c[2], c[3]}},
                      {"relative_deviation", {dev_bb, dev_bt, dev_bt, dev_tt}},
                      {"max_relative_deviation", std::max({dev_bb, dev_bt, dev_tt})}};
  sm["known_beta"] = {{"variance", var_kb}, {"target", target_kb}, {"relative_deviation", relative(var_kb, target_kb)},
                      {"n", kb.size()}};
  sm["known_b"] = {{"variance", var_kt}, {"target", target_kt}, {"relative_deviation", relative(var_kt, target_kt)},
                   {"n", kt.size()}};
  sm["runtime_seconds"] = elapsed(start);
  return r;
}

ExperimentReport run_mixing_decay(const ExperimentConfig& config) {
  config.validate();
  if (config.scheme != Scheme::Stationary) throw ValidationError("scheme: the mixing study needs 'stationary'");
  const auto start = std::chrono::steady_clock::now();
  const VouParams& p = config.params;
  const double t = max_horizon(config);
  const double dt = config.dts.front();
  std::vector<std::size_t> lag_steps;
  for (double h : config.lags) {
    if (h > t) throw ValidationError("lags: lag exceeds the horizon");
    lag_steps.push_back(h == 0.0 ? 0 : steps_or_throw(h, dt, "lags"));
  }
  PathBatch batch(config, p, t, dt);
  const std::size_t stride = batch.stride();
  auto per_path = parallel_map<std::vector<double>>(config.n_paths, config.threads, [&](std::size_t i) {
    const SamplePath fine = batch.simulate(i);
    std::vector<double> out;
    out.push_back(fine.values[0]);
    for (std::size_t k : lag_steps) out.push_back(fine.values[k * stride]);
    return out;
  });

  // Analytic curve on a resolvent long enough for the largest lag.
  const double lag_max = *std::max_element(config.lags.begin(), config.lags.end());
  const double extra = config.kernel.kind() == KernelKind::ExpSum ? 50.0 / std::abs(p.beta) : 200.0;
  const double rdt = batch.fine_step() / static_cast<double>(config.resolvent_refinement);
  const double rh = rdt * std::ceil((lag_max + extra) / rdt - 1e-9);
  const SecondKindResolvent res(config.kernel, p.beta, rdt, rh);
  const double m1 = stationary_mean(config.kernel, p.b, p.beta, p.x0);

  ExperimentReport r;
  r.experiment = "mixing_decay";
  r.columns = {"lag", "f", "cov_hat", "se", "analytic", "z_score", "n_paths", "seed", "seed_rule"};
  const std::size_t n = config.n_paths;
  std::vector<double> analytic_x;
  for (std::size_t l = 0; l < lag_steps.size(); ++l) {
    const double a = stationary_autocovariance(res, p.sigma, config.lags[l]);
    analytic_x.push_back(a);
    for (int power : {1, 2}) {
      std::vector<double> f0(n), gh(n);
      for (std::size_t i = 0; i < n; ++i) {
        f0[i] = std::pow(per_path[i][0], power);
        gh[i] = std::pow(per_path[i][l + 1], power);
      }
      const double cov = sample_covariance(f0, gh);
      const double mf = summarize(f0).mean, mg = summarize(gh).mean;
      std::vector<double> prod(n);
      for (std::size_t i = 0; i < n; ++i) prod[i] = (f0[i] - mf) * (gh[i] - mg);
      const double se = summarize(prod).se;
      // Gaussian: cov(X_0^2, X_h^2) = 2 c^2 + 4 m1^2 c.
      const double target = power == 1 ? a : 2.0 * a * a + 4.0 * m1 * m1 * a;
      r.rows.push_back({{"lag", config.lags[l]},
                        {"f", power == 1 ? "x" : "x2"},
                        {"cov_hat", cov},
                        {"se", se},
                        {"analytic", target},
                        {"z_score", se > 0.0 ? (cov - target) / se : nan()},
                        {"n_paths", n},
                        {"seed", config.seed},
                        {"seed_rule", kSeedRule}});
    }
  }
  std::vector<std::size_t> order(config.lags.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return config.lags[a] < config.lags[b]; });
  bool monotone = true;
  for (std::size_t i = 1; i < order.size(); ++i) {
    if (std::abs(analytic_x[order[i]]) > std::abs(analytic_x[order[i - 1]]) * (1.0 + 1e-12)) monotone = false;
  }
  r.summary["provenance"] = provenance(config);
  r.summary["analytic_monotone"] = monotone;
  r.summary["stationary_mean"] = m1;
  r.summary["variance_analytic"] = stationary_autocovariance(res, p.sigma, 0.0);
  r.summary["warnings"] = batch.warning().empty() ? json::array() : json::array({batch.warning()});
  r.summary["runtime_seconds"] = elapsed(start);
  return r;
}

bool consistency_summable(const ConsistencySequence& seq, double p, double* partial_sum) {
  if (!(seq.parameter > 0.0) || !(p > 0.0)) throw DomainError("consistency check needs a positive parameter and p");
  if (seq.kind == ConsistencySequence::Kind::Geometric && !(seq.parameter > 1.0)) {
    throw DomainError("geometric horizons need q > 1");
  }
  auto term = [&](double n) {
    const double ratio = seq.kind == ConsistencySequence::Kind::Power ? std::pow(n / (n + 1.0), seq.parameter)
                                                                       : 1.0 / seq.parameter;
    return std::pow(std::abs(1.0 - ratio), p);
  };
  // Increments over doubling blocks [2^j, 2^(j+1)); a convergent series has them shrinking geometrically.
  double sum = 0.0, previous = 0.0;
  std::size_t n = 1;
  std::vector<double> blocks;
  for (int j = 0; j < 22; ++j) {
    double block = 0.0;
    const std::size_t end = std::size_t{1} << (j + 1);
    for (; n < end; ++n) block += term(static_cast<double>(n));
    sum += block;
    blocks.push_back(block);
  }
  if (partial_sum) *partial_sum = sum;
  for (std::size_t j = blocks.size() - 4; j < blocks.size(); ++j) {
    previous = blocks[j - 1];
    if (!(blocks[j] < 0.95 * previous)) return false;
  }
  return true;
}

ExperimentReport run_strong_consistency_demo(const ExperimentConfig& config, const ConsistencySequence& seq,
                                             double p) {
  config.validate();
  double partial = 0.0;
  const bool summable = consistency_summable(seq, p, &partial);
  if (!summable) {
    std::ostringstream os;
    os << (seq.kind == ConsistencySequence::Kind::Power ? "T_n = n^" : "T_n = q^n, q = ") << seq.parameter
       << ": sum |1 - T_n/T_{n+1}|^" << p << " does not converge (partial sum " << partial
       << "); strong consistency along this sequence is not covered";
    throw ValidationError(os.str());
  }
  const auto start = std::chrono::steady_clock::now();
  const VouParams& pr = config.params;
  const double t_max = max_horizon(config);
  const double dt = config.dts.front();
  const std::size_t seeds = std::min<std::size_t>(config.n_paths, 10);

  // Horizons T_n rounded down to the grid, at least ten cells, duplicates dropped.
  std::vector<std::pair<std::size_t, std::size_t>> schedule;  // (n, grid index)
  for (std::size_t i = 1;; ++i) {
    const double tn = seq.kind == ConsistencySequence::Kind::Power ? std::pow(static_cast<double>(i), seq.parameter)
                                                                   : std::pow(seq.parameter, static_cast<double>(i));
    if (tn > t_max * (1.0 + 1e-12)) break;
    const auto k = static_cast<std::size_t>(std::floor(tn / dt + 1e-9));
    if (k < 10 || (!schedule.empty() && schedule.back().second == k)) continue;
    schedule.emplace_back(i, k);
  }
  if (schedule.empty()) throw ValidationError("horizons: no T_n falls on the grid below the largest horizon");

  PathBatch batch(config, pr, t_max, dt);
  auto per_seed = parallel_map<std::vector<std::optional<DriftEstimate>>>(seeds, config.threads, [&](std::size_t i) {
    const Observed o = observe(batch.simulate(i), batch);
    std::vector<std::optional<DriftEstimate>> out;
    for (const auto& [n, k] : schedule) out.push_back(estimate(EstimatorMethod::MLE, o, k, config, pr));
    return out;
  });

  ExperimentReport r;
  r.experiment = "strong_consistency";
  r.columns = {"path", "seed", "n", "T_n", "b_hat", "beta_hat", "rel_err_beta"};
  const double band_start = std::min(200.0, t_max);
  json entries = json::array();
  std::size_t within = 0;
  for (std::size_t s = 0; s < seeds; ++s) {
    double entry = nan();
    for (std::size_t j = schedule.size(); j-- > 0;) {
      const auto& e = per_seed[s][j];
      if (!e || relative(e->beta_hat, pr.beta) > 0.1) break;
      entry = dt * static_cast<double>(schedule[j].second);
    }
    entries.push_back(std::isnan(entry) ? json(nullptr) : json(entry));
    if (!std::isnan(entry) && entry <= band_start * (1.0 + 1e-12)) ++within;
    for (std::size_t j = 0; j < schedule.size(); ++j) {
      const auto& e = per_seed[s][j];
      r.rows.push_back({{"path", s},
                        {"seed", path_seed(config.seed, s)},
                        {"n", schedule[j].first},
                        {"T_n", dt * static_cast<double>(schedule[j].second)},
                        {"b_hat", e ? json(e->b_hat) : json(nullptr)},
                        {"beta_hat", e ? json(e->beta_hat) : json(nullptr)},
                        {"rel_err_beta", e ? json(relative(e->beta_hat, pr.beta)) : json(nullptr)}});
    }
  }
  r.summary["provenance"] = provenance(config);
  r.summary["sequence"] = {{"kind", seq.kind == ConsistencySequence::Kind::Power ? "power" : "geometric"},
                           {"parameter", seq.parameter},
                           {"p", p},
                           {"partial_sum", partial},
                           {"summable", summable}};
  r.summary["band"] = {{"relative_width", 0.1},
                       {"horizon", band_start},
                       {"seeds", seeds},
                       {"seeds_within_band", within},
                       {"entry_horizons", entries}};
  r.summary["runtime_seconds"] = elapsed(start);
  return r;
}

}  // namespace vou
