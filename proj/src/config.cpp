#include "vou/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "vou/error.hpp"

namespace vou {

namespace {

using nlohmann::json;

ExperimentConfig mle_study(const KernelSpec& kernel) {
  ExperimentConfig c;
  c.kernel = kernel;
  c.scheme = Scheme::Euler;
  c.horizons = {50.0, 100.0, 150.0, 200.0};
  c.dts = {0.2, 0.5, 1.0};
  c.n_paths = 200;
  c.estimators = {EstimatorMethod::MLE};
  return c;
}

template <class T>
T field(const json& j, const std::string& name) {
  try {
    return j.at(name).get<T>();
  } catch (const json::exception& e) {
    throw ValidationError(name + ": " + e.what());
  }
}

}  // namespace

std::vector<std::string> preset_names() {
  return {"paper", "paper-lln", "paper-fig3", "paper-fig4", "paper-fig5", "paper-normality", "mixing-expsum"};
}

ExperimentConfig preset_config(const std::string& name) {
  ExperimentConfig c;
  if (name == "paper") {
  } else if (name == "paper-lln") {
    c.horizons = {100.0, 200.0, 300.0, 400.0, 500.0};
    c.dts = {0.5};
    c.estimators = {EstimatorMethod::MoM, EstimatorMethod::MLE};
  } else if (name == "paper-fig3") {
    c = mle_study(KernelSpec::fractional(0.75));
  } else if (name == "paper-fig4") {
    c = mle_study(KernelSpec::log_kernel());
  } else if (name == "paper-fig5") {
    c = mle_study(KernelSpec::exp_sum({1.0, 2.0}, {1.0, 2.0}));
  } else if (name == "paper-normality") {
    c.scheme = Scheme::EulerProduct;
    c.horizons = {200.0};
    c.dts = {0.2};
    c.n_paths = 2000;
    c.estimators = {EstimatorMethod::MLE, EstimatorMethod::MLEKnownB, EstimatorMethod::MLEKnownBeta};
  } else if (name == "mixing-expsum") {
    c.kernel = KernelSpec::exp_sum({1.0}, {1.0});
    c.scheme = Scheme::Stationary;
    c.horizons = {20.0};
    c.dts = {0.1};
    c.n_paths = 2000;
    c.lags = {0.0, 0.5, 1.0, 2.0, 5.0, 10.0, 20.0};
  } else {
    throw ValidationError("preset: unknown preset '" + name + "'");
  }
  c.name = name;
  c.preset = name;
  return c;
}

ExperimentConfig config_from_json(const json& j) {
  if (!j.is_object()) throw ValidationError("config: expected a JSON object");
  static const std::set<std::string> known{"name",        "preset",        "kernel",     "params",
                                           "scheme",      "horizons",      "dt",         "n_paths",
                                           "seed",        "estimators",    "parameter_grid", "fine_factor",
                                           "fine_terminal", "resolvent_refinement", "burn_in", "lags",
                                           "threads"};
  for (const auto& [key, value] : j.items()) {
    if (!known.count(key)) throw ValidationError(key + ": unknown field");
  }
  ExperimentConfig c = preset_config(j.contains("preset") ? field<std::string>(j, "preset") : "paper");
  if (j.contains("name")) c.name = field<std::string>(j, "name");
  if (j.contains("kernel")) {
    try {
      c.kernel = kernel_from_json(j.at("kernel"));
    } catch (const std::exception& e) {
      throw ValidationError(std::string("kernel: ") + e.what());
    }
  }
  if (j.contains("params")) {
    const json& p = j.at("params");
    if (!p.is_object()) throw ValidationError("params: expected an object");
    for (const char* key : {"b", "beta", "sigma", "x0"}) {
      if (!p.contains(key)) throw ValidationError(std::string("params.") + key + ": missing");
      if (!p.at(key).is_number()) throw ValidationError(std::string("params.") + key + ": expected a number");
    }
    for (const auto& [key, value] : p.items()) {
      if (key != "b" && key != "beta" && key != "sigma" && key != "x0") {
        throw ValidationError("params." + key + ": unknown field");
      }
    }
    c.params = {p.at("b").get<double>(), p.at("beta").get<double>(), p.at("sigma").get<double>(),
                p.at("x0").get<double>()};
  }
  if (j.contains("scheme")) {
    try {
      c.scheme = scheme_from_string(field<std::string>(j, "scheme"));
    } catch (const DomainError& e) {
      throw ValidationError(std::string("scheme: ") + e.what());
    }
  }
  if (j.contains("horizons")) c.horizons = field<std::vector<double>>(j, "horizons");
  if (j.contains("dt")) c.dts = field<std::vector<double>>(j, "dt");
  if (j.contains("n_paths")) c.n_paths = field<std::size_t>(j, "n_paths");
  if (j.contains("seed")) c.seed = field<std::uint64_t>(j, "seed");
  if (j.contains("estimators")) {
    c.estimators.clear();
    for (const auto& name : field<std::vector<std::string>>(j, "estimators")) {
      try {
        c.estimators.push_back(estimator_from_string(name));
      } catch (const DomainError& e) {
        throw ValidationError(std::string("estimators: ") + e.what());
      }
    }
  }
  if (j.contains("parameter_grid")) {
    c.parameter_grid.clear();
    for (const auto& pair : field<std::vector<std::vector<double>>>(j, "parameter_grid")) {
      if (pair.size() != 2) throw ValidationError("parameter_grid: entries must be [b, beta] pairs");
      c.parameter_grid.emplace_back(pair[0], pair[1]);
    }
  }
  if (j.contains("fine_factor")) c.fine_factor = field<std::size_t>(j, "fine_factor");
  if (j.contains("fine_terminal")) c.fine_terminal = field<bool>(j, "fine_terminal");
  if (j.contains("resolvent_refinement")) c.resolvent_refinement = field<std::size_t>(j, "resolvent_refinement");
  if (j.contains("burn_in")) c.burn_in = field<double>(j, "burn_in");
  if (j.contains("lags")) c.lags = field<std::vector<double>>(j, "lags");
  if (j.contains("threads")) c.threads = field<std::size_t>(j, "threads");
  c.validate();
  return c;
}

json config_to_json(const ExperimentConfig& c) {
  json k;
  to_json(k, c.kernel);
  json estimators = json::array();
  for (EstimatorMethod e : c.estimators) estimators.push_back(to_string(e));
  json grid = json::array();
  for (const auto& [b, beta] : c.parameter_grid) grid.push_back({b, beta});
  return {{"name", c.name},
          {"preset", c.preset},
          {"kernel", k},
          {"params", {{"b", c.params.b}, {"beta", c.params.beta}, {"sigma", c.params.sigma}, {"x0", c.params.x0}}},
          {"scheme", to_string(c.scheme)},
          {"horizons", c.horizons},
          {"dt", c.dts},
          {"n_paths", c.n_paths},
          {"seed", c.seed},
          {"estimators", estimators},
          {"parameter_grid", grid},
          {"fine_factor", c.fine_factor},
          {"fine_terminal", c.fine_terminal},
          {"resolvent_refinement", c.resolvent_refinement},
          {"burn_in", c.burn_in},
          {"lags", c.lags},
          {"threads", c.threads}};
}

ExperimentConfig parse_config(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    const std::size_t upto = std::min<std::size_t>(e.byte, text.size());
    std::size_t line = 1, column = 1;
    for (std::size_t i = 0; i + 1 < upto; ++i) {
      if (text[i] == '\n') {
        ++line;
        column = 1;
      } else {
        ++column;
      }
    }
    std::ostringstream os;
    os << "config parse error at line " << line << ", column " << column << ": " << e.what();
    throw ValidationError(os.str());
  }
  return config_from_json(j);
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("config: cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

void save_config(const ExperimentConfig& config, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw ValidationError("config: cannot write '" + path.string() + "'");
  out << config_to_json(config).dump(2) << '\n';
}

}  // namespace vou
