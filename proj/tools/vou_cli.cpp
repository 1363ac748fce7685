#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "vou/acceptance.hpp"
#include "vou/config.hpp"
#include "vou/error.hpp"
#include "vou/estimators.hpp"
#include "vou/first_kind.hpp"
#include "vou/harness.hpp"
#include "vou/io.hpp"
#include "vou/kernel.hpp"
#include "vou/moments.hpp"
#include "vou/rng.hpp"
#include "vou/second_kind.hpp"
#include "vou/simulator.hpp"

namespace {

using nlohmann::json;

enum Exit { kOk = 0, kValidation = 1, kNumerical = 2, kAcceptance = 3 };

struct KernelArgs {
  std::string kind;
  std::optional<double> alpha;
  std::optional<double> gamma;
  std::vector<double> coefficients{1.0};
  std::vector<double> rates{1.0};
  double rate = 1.0;

  void attach(CLI::App* app) {
    app->add_option("--kind", kind, "fractional, log, exp_sum, damped_fractional or constant");
    app->add_option("--alpha", alpha, "singularity exponent");
    app->add_option("--gamma", gamma, "Hoelder exponent (log kernel)");
    app->add_option("--coefficients", coefficients, "exp-sum coefficients");
    app->add_option("--rates", rates, "exp-sum rates");
    app->add_option("--rate", rate, "damping rate");
  }

  vou::KernelSpec build() const {
    auto need_alpha = [&] {
      if (!alpha) throw vou::ValidationError("--alpha is required for kind '" + kind + "'");
      return *alpha;
    };
    if (kind == "fractional") return vou::KernelSpec::fractional(need_alpha());
    if (kind == "log") return vou::KernelSpec::log_kernel(alpha.value_or(0.99), gamma.value_or(0.49));
    if (kind == "exp_sum") return vou::KernelSpec::exp_sum(coefficients, rates);
    if (kind == "damped_fractional") return vou::KernelSpec::damped_fractional(need_alpha(), rate);
    if (kind == "constant") return vou::KernelSpec::constant_one();
    throw vou::ValidationError("--kind: unknown kernel '" + kind + "'");
  }
};

struct Globals {
  std::string config_path;
  std::string output_dir;
  std::optional<std::uint64_t> seed;
  std::size_t threads = 0;
  int verbosity = 0;
};

std::string format_value(double x) { return vou::format_double(x); }

std::string env_or(const char* name, const std::string& fallback) {
  const char* v = std::getenv(name);
  return v && *v ? std::string(v) : fallback;
}

vou::ExperimentConfig base_config(const Globals& g) {
  vou::ExperimentConfig c = g.config_path.empty() ? vou::preset_config("paper") : vou::load_config(g.config_path);
  if (g.seed) c.seed = *g.seed;
  if (g.threads) c.threads = g.threads;
  return c;
}

json without_runtime(json j) {
  if (j.is_object()) j.erase("runtime_seconds");
  return j;
}

int run_kernel_info(const KernelArgs& ka) {
  const vou::KernelSpec k = ka.build();
  json j;
  vou::to_json(j, k);
  std::cout << "kernel  " << k.name() << "\n"
            << "alpha   " << format_value(k.alpha()) << "\n"
            << "gamma   " << format_value(k.gamma()) << "\n"
            << "K(0+)   " << format_value(k.k_zero_plus()) << "\n"
            << "||K||_1 " << format_value(k.l1_norm()) << "\n"
            << "power tail " << (k.has_power_tail() ? "yes" : "no") << "\n"
            << "json    " << j.dump() << "\n";
  return kOk;
}

int run_resolvent(const Globals& g, const KernelArgs& ka, double beta, double dt, double horizon, bool first_kind) {
  const vou::KernelSpec k = ka.build();
  vou::OutputDirectory out(g.output_dir);
  const vou::SecondKindResolvent res(k, beta, dt, horizon);
  out.write("resolvent.csv", vou::resolvent_csv(res));
  const vou::TailIntegrals ti = vou::e_beta_tail_integrals(res);
  json kj;
  vou::to_json(kj, k);
  json summary{{"kernel", kj},
               {"beta", beta},
               {"dt", dt},
               {"horizon", horizon},
               {"integral", ti.integral},
               {"integral_with_tail", ti.total()},
               {"integral_limit", vou::e_beta_integral_limit(k, beta)},
               {"square_integral", ti.square_integral},
               {"square_integral_with_tail", ti.total_square()},
               {"tail_model", ti.tail_model},
               {"residual", res.residual()}};
  if (first_kind) {
    const vou::FirstKindResolvent L = vou::first_kind_resolvent(k, dt, horizon);
    std::ostringstream os;
    os << "t,L_cumulative\r\n";
    for (std::size_t i = 0; i <= L.steps(); ++i) {
      os << vou::format_double(dt * static_cast<double>(i)) << ',' << vou::format_double(L.cumulative(i)) << "\r\n";
    }
    out.write("first_kind.csv", os.str());
    summary["first_kind_atom"] = L.atom;
    summary["first_kind_defect"] = vou::first_kind_identity_defect(L);
  }
  out.write("resolvent.json", vou::dump_json(summary));
  out.write_manifest({{"command", "resolvent"}});
  if (g.verbosity > 0) std::cerr << summary.dump(2) << "\n";
  std::cout << "int_0^T E = " << format_value(ti.integral) << ", with tail " << format_value(ti.total()) << "\n";
  return kOk;
}

int run_simulate(const Globals& g, const KernelArgs& ka, const std::string& scheme_name, std::size_t paths,
                 std::optional<double> horizon, std::optional<double> dt, bool retain_noise,
                 const std::string& format) {
  vou::ExperimentConfig c = base_config(g);
  if (!ka.kind.empty()) c.kernel = ka.build();
  if (!scheme_name.empty()) c.scheme = vou::scheme_from_string(scheme_name);
  const double t = horizon.value_or(c.horizons.back());
  const double step = dt.value_or(c.dts.front());
  c.horizons = {t};
  c.dts = {step};
  c.validate();
  const vou::PathBatch batch(c, c.params, t, step, retain_noise);
  const std::string warning = batch.warning();
  std::vector<vou::SamplePath> out_paths;
  for (std::size_t i = 0; i < paths; ++i) out_paths.push_back(batch.simulate(i));
  vou::OutputDirectory out(g.output_dir);
  if (format == "binary") {
    std::ostringstream os(std::ios::binary);
    vou::write_path_batch(os, c.kernel, c.params, c.seed, out_paths);
    out.write("paths.bin", os.str());
  } else {
    for (std::size_t i = 0; i < out_paths.size(); ++i) {
      out.write("path_" + std::to_string(i) + ".csv", vou::path_csv(out_paths[i]));
    }
  }
  out.write("config.json", vou::dump_json(vou::config_to_json(c)));
  json extra{{"command", "simulate"}, {"seed", c.seed}, {"paths", paths}};
  if (!warning.empty()) {
    extra["warning"] = warning;
    std::cerr << "warning: " << warning << "\n";
  }
  out.write_manifest(extra);
  std::cout << "wrote " << paths << " path(s) to " << out.root().string() << "\n";
  return kOk;
}

int run_estimate(const Globals& g, const KernelArgs& ka, const std::string& input, const std::string& method_name,
                 std::size_t stride, std::optional<double> known, std::optional<double> sigma, bool fine_terminal) {
  vou::ExperimentConfig c = base_config(g);
  if (!ka.kind.empty()) c.kernel = ka.build();
  const vou::PathOnGrid path = vou::read_path_csv(input);
  const vou::EstimatorMethod method = vou::estimator_from_string(method_name);
  const double s = sigma.value_or(c.params.sigma);
  vou::DriftEstimate e;
  if (method == vou::EstimatorMethod::MoM) {
    if (c.kernel.kind() != vou::KernelKind::Fractional) {
      throw vou::ValidationError("--method mom needs a fractional kernel");
    }
    std::vector<double> x;
    for (std::size_t k = 0; k < path.values.size(); k += stride) x.push_back(path.values[k]);
    e = vou::method_of_moments(x, path.grid_step * static_cast<double>(stride), c.kernel.alpha(), s);
  } else {
    if (path.steps() % stride != 0) throw vou::ValidationError("--stride must divide the number of path steps");
    const vou::FirstKindResolvent L = vou::first_kind_resolvent(c.kernel, path.grid_step, path.horizon(),
                                                                vou::first_kind_options_for(c.scheme));
    const vou::EstimationInput in = vou::prepare_estimation(path, L, stride);
    const vou::MleOptions mo{fine_terminal};
    switch (method) {
      case vou::EstimatorMethod::MLE:
        e = vou::mle_discrete(in, mo);
        break;
      case vou::EstimatorMethod::MLEKnownBeta:
        e = vou::mle_known_beta(in, known.value_or(c.params.beta), mo);
        break;
      case vou::EstimatorMethod::MLEKnownB:
        e = vou::mle_known_b(in, known.value_or(c.params.b));
        break;
      default:
        break;
    }
  }
  vou::OutputDirectory out(g.output_dir);
  const std::string csv = vou::estimate_csv_header() + vou::estimate_csv_row(e, c.seed);
  out.write("estimate.csv", csv);
  out.write_manifest({{"command", "estimate"}, {"input", input}});
  std::cout << csv;
  return kOk;
}

int run_experiment(const Globals& g, const std::string& type, double kappa, bool geometric, double p) {
  const vou::ExperimentConfig c = base_config(g);
  vou::ExperimentReport r;
  if (type == "lln") {
    r = vou::run_lln(c);
  } else if (type == "convergence") {
    r = vou::run_estimator_convergence(c);
  } else if (type == "normality") {
    r = vou::run_normality(c);
  } else if (type == "mixing") {
    r = vou::run_mixing_decay(c);
  } else if (type == "consistency") {
    vou::ConsistencySequence seq;
    seq.kind = geometric ? vou::ConsistencySequence::Kind::Geometric : vou::ConsistencySequence::Kind::Power;
    seq.parameter = kappa;
    r = vou::run_strong_consistency_demo(c, seq, p);
  } else {
    throw vou::ValidationError("--type: unknown experiment '" + type + "'");
  }
  if (g.verbosity > 0 && r.summary.contains("runtime_seconds")) {
    std::cerr << "runtime " << r.summary["runtime_seconds"].get<double>() << " s\n";
  }
  vou::OutputDirectory out(g.output_dir);
  out.write(r.experiment + ".csv", vou::report_csv(r));
  json summary = without_runtime(r.summary);
  summary["config"] = vou::config_to_json(c);
  out.write(r.experiment + "_summary.json", vou::dump_json(summary));
  out.write_manifest({{"command", "experiment"}, {"experiment", r.experiment}, {"seed", c.seed}});
  std::cout << "wrote " << r.rows.size() << " row(s) to " << (out.root() / (r.experiment + ".csv")).string() << "\n";
  return kOk;
}

int run_acceptance_cmd(const Globals& g, const std::string& suite, int only) {
  vou::AcceptanceOptions opts;
  if (g.seed) opts.seed = *g.seed;
  opts.threads = g.threads;
  const std::vector<int> ids = only ? std::vector<int>{only} : vou::suite_criteria(vou::suite_from_string(suite));
  std::vector<vou::CriterionResult> results;
  bool ok = true;
  for (int id : ids) {
    results.push_back(vou::run_criterion(id, opts));
    std::cout << vou::format_result_line(results.back()) << std::endl;
    ok = ok && results.back().passed;
  }
  vou::OutputDirectory out(g.output_dir);
  json j = vou::acceptance_json(results, opts);
  j["suite"] = only ? "single" : suite;
  out.write("acceptance.json", vou::dump_json(j));
  out.write_manifest({{"command", "acceptance"}});
  return ok ? kOk : kAcceptance;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Volterra Ornstein-Uhlenbeck toolkit"};
  app.require_subcommand(1, 1);
  Globals g;
  g.output_dir = env_or("VOU_OUTPUT_DIR", "vou-out");
  if (const char* t = std::getenv("VOU_THREADS")) g.threads = std::strtoull(t, nullptr, 10);
  app.add_option("--config", g.config_path, "experiment config (JSON)")->check(CLI::ExistingFile);
  app.add_option("--output-dir", g.output_dir, "directory for all outputs");
  app.add_option("--seed", g.seed, "master seed override");
  app.add_option("--threads", g.threads, "worker threads, 0 = all cores");
  app.add_flag("-v,--verbose", g.verbosity, "more output on stderr");

  KernelArgs info_k, res_k, sim_k, est_k;
  auto* info = app.add_subcommand("kernel-info", "kernel metadata");
  info_k.attach(info);
  info->get_option("--kind")->required();

  auto* res = app.add_subcommand("resolvent", "tabulate E_beta (and optionally L)");
  res_k.attach(res);
  res->get_option("--kind")->required();
  double beta = -1.0, res_dt = 1e-2, res_t = 10.0;
  bool first_kind = false;
  res->add_option("--beta", beta, "mean reversion, negative");
  res->add_option("--dt", res_dt, "grid step");
  res->add_option("--horizon", res_t, "horizon T");
  res->add_flag("--first-kind", first_kind, "also write the first-kind resolvent");

  auto* sim = app.add_subcommand("simulate", "simulate paths");
  sim_k.attach(sim);
  std::string scheme;
  std::size_t paths = 1;
  std::optional<double> sim_t, sim_dt;
  bool retain_noise = false;
  std::string format = "csv";
  sim->add_option("--scheme", scheme, "euler, euler_product, resolvent, cholesky or stationary");
  sim->add_option("--paths", paths, "number of paths");
  sim->add_option("--horizon", sim_t, "horizon T");
  sim->add_option("--dt", sim_dt, "grid step");
  sim->add_flag("--retain-noise", retain_noise, "keep the Gaussian increments");
  sim->add_option("--format", format, "csv or binary")->check(CLI::IsMember({"csv", "binary"}));

  auto* est = app.add_subcommand("estimate", "estimate drift parameters from a path CSV");
  est_k.attach(est);
  std::string input, method = "mle";
  std::size_t stride = 1;
  std::optional<double> known, sigma;
  bool fine_terminal = false;
  est->add_option("--input", input, "path CSV with columns t, X")->required()->check(CLI::ExistingFile);
  est->add_option("--method", method, "mle, mle_known_b, mle_known_beta or mom");
  est->add_option("--stride", stride, "observe every stride-th point");
  est->add_option("--known", known, "the known parameter for the known-b / known-beta variants");
  est->add_option("--sigma", sigma, "volatility for the method of moments");
  est->add_flag("--fine-terminal", fine_terminal, "fine-grid Z for the terminal value");

  auto* exp = app.add_subcommand("experiment", "run a Monte Carlo study");
  std::string type = "convergence";
  double kappa = 0.5, p = 4.0;
  bool geometric = false;
  exp->add_option("--type", type, "lln, convergence, normality, mixing or consistency");
  exp->add_option("--kappa", kappa, "T_n = n^kappa (or q^n with --geometric)");
  exp->add_flag("--geometric", geometric, "geometric horizons T_n = kappa^n");
  exp->add_option("--p", p, "summability exponent");

  auto* acc = app.add_subcommand("acceptance", "run the acceptance criteria");
  std::string suite = "full";
  int only = 0;
  acc->add_option("--suite", suite, "full or fast")->check(CLI::IsMember({"full", "fast"}));
  acc->add_option("--only", only, "single criterion")->check(CLI::Range(1, vou::kCriterionCount));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kValidation;
  }

  try {
    if (*info) return run_kernel_info(info_k);
    if (*res) return run_resolvent(g, res_k, beta, res_dt, res_t, first_kind);
    if (*sim) return run_simulate(g, sim_k, scheme, paths, sim_t, sim_dt, retain_noise, format);
    if (*est) return run_estimate(g, est_k, input, method, stride, known, sigma, fine_terminal);
    if (*exp) return run_experiment(g, type, kappa, geometric, p);
    if (*acc) return run_acceptance_cmd(g, suite, only);
  } catch (const vou::NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return kNumerical;
  } catch (const std::invalid_argument& e) {
    std::cerr << "validation error: " << e.what() << "\n";
    return kValidation;
  } catch (const std::domain_error& e) {
    std::cerr << "validation error: " << e.what() << "\n";
    return kValidation;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kNumerical;
  }
  return kOk;
}
