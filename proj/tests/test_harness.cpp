#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "vou/config.hpp"
#include "vou/error.hpp"
#include "vou/harness.hpp"
#include "vou/io.hpp"
#include "vou/rng.hpp"
#include "vou/stats.hpp"

using namespace vou;
using doctest::Approx;

namespace {

std::filesystem::path scratch(const std::string& name) {
  const auto p = std::filesystem::temp_directory_path() / ("vou_unit_" + name);
  std::filesystem::remove_all(p);
  return p;
}

ExperimentConfig small_convergence() {
  ExperimentConfig c;
  c.kernel = KernelSpec::fractional(0.75);
  c.scheme = Scheme::EulerProduct;
  c.horizons = {10.0, 20.0};
  c.dts = {0.5};
  c.n_paths = 8;
  c.threads = 1;
  return c;
}

}  // namespace

TEST_CASE("config presets") {
  for (const auto& name : preset_names()) CHECK_NOTHROW(preset_config(name).validate());
  const auto fig3 = preset_config("paper-fig3");
  CHECK(fig3.kernel == KernelSpec::fractional(0.75));
  CHECK(fig3.dts == std::vector<double>{0.2, 0.5, 1.0});
  CHECK(fig3.horizons.back() == 200.0);
  CHECK(fig3.n_paths == 200);
  CHECK(fig3.params == VouParams{1.2, -1.0, 0.3, 1.0});
  CHECK_THROWS_AS(preset_config("nope"), ValidationError);
}

TEST_CASE("config validation names the field") {
  const std::string text = R"({"params": {"b": 1.2, "sigma": 0.3, "x0": 1}})";
  try {
    parse_config(text);
    FAIL("expected a validation error");
  } catch (const ValidationError& e) {
    CHECK(std::string(e.what()).find("params.beta") != std::string::npos);
  }
  CHECK_THROWS_AS(parse_config(R"({"colour": 1})"), ValidationError);
  CHECK_THROWS_AS(parse_config(R"({"scheme": "rk4"})"), ValidationError);
  try {
    parse_config("{\n  \"seed\": ,\n}");
    FAIL("expected a parse error");
  } catch (const ValidationError& e) {
    CHECK(std::string(e.what()).find("line 2") != std::string::npos);
  }
}

TEST_CASE("config save and load round trip") {
  const auto dir = scratch("config");
  std::filesystem::create_directories(dir);
  for (const auto& name : preset_names()) {
    const auto c = preset_config(name);
    save_config(c, dir / "c.json");
    CHECK(load_config(dir / "c.json") == c);
  }
  CHECK(config_from_json(nlohmann::json::object()) == preset_config("paper"));
}

TEST_CASE("csv and number formatting") {
  CHECK(csv_field("plain") == "plain");
  CHECK(csv_field("a,b") == "\"a,b\"");
  CHECK(csv_field("say \"hi\"") == "\"say \"\"hi\"\"\"");
  for (double x : {0.1, -1.0 / 3.0, 1e-300, 6.02214076e23, 0.0}) CHECK(parse_double(format_double(x)) == x);
  CHECK(format_double(NAN) == "nan");
  CHECK(std::isinf(parse_double("-inf")));
  CHECK_THROWS_AS(parse_double("1.5x"), ValidationError);
}

TEST_CASE("sha256 known vector") {
  CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST_CASE("path csv and binary batch round trip") {
  const auto dir = scratch("paths");
  OutputDirectory out(dir);
  const VouParams p;
  const auto k = KernelSpec::fractional(0.75);
  std::vector<SamplePath> paths;
  for (std::uint64_t i = 0; i < 3; ++i) paths.push_back(simulate_euler(k, p, 40, 4.0, path_seed(1, i)));
  out.write("path.csv", path_csv(paths[0]));
  const auto back = read_path_csv(dir / "path.csv");
  CHECK(back.values == paths[0].values);
  CHECK(back.grid_step == Approx(0.1));

  std::ostringstream bin;
  write_path_batch(bin, k, p, 1, paths);
  std::istringstream in(bin.str());
  const auto f = read_path_batch(in);
  CHECK(f.paths == 3);
  CHECK(f.steps == 40);
  CHECK(kernel_from_json(f.header.at("kernel")) == k);
  for (std::size_t i = 0; i < 3; ++i) {
    for (std::size_t s = 0; s <= 40; ++s) CHECK(f.at(i, s) == paths[i].values[s]);
  }
  std::istringstream junk("NOTAPATHxxxxxxxx");
  CHECK_THROWS_AS(read_path_batch(junk), ValidationError);

  out.write_manifest();
  std::ifstream m(dir / "manifest.json");
  const auto manifest = nlohmann::json::parse(m);
  CHECK(manifest.at("files").at(0).at("sha256") == sha256_file(dir / "path.csv"));
}

TEST_CASE("Kolmogorov distribution") {
  CHECK(kolmogorov_cdf(10, 0.274) == Approx(0.6284796154565043).epsilon(1e-10));
  CHECK(kolmogorov_cdf(1000, 0.05) == Approx(0.9869879197970768).epsilon(1e-8));
  NormalStream rng(4);
  std::vector<double> good, shifted;
  for (int i = 0; i < 1000; ++i) {
    const double z = rng();
    good.push_back(z);
    shifted.push_back(z + 0.5);
  }
  CHECK(ks_test_standard_normal(good).p_value > 0.01);
  CHECK(ks_test_standard_normal(shifted).p_value < 1e-6);
}

TEST_CASE("parallel map keeps order and propagates errors") {
  const auto v = parallel_map<int>(100, 4, [](std::size_t i) { return static_cast<int>(i * i); });
  for (std::size_t i = 0; i < v.size(); ++i) CHECK(v[i] == static_cast<int>(i * i));
  CHECK_THROWS_AS(parallel_map<int>(10, 3,
                                    [](std::size_t i) -> int {
                                      if (i == 7) throw NumericalError("boom");
                                      return 0;
                                    }),
                  NumericalError);
}

TEST_CASE("path batches do not depend on the batch size") {
  auto c = small_convergence();
  PathBatch a(c, c.params, 10.0, 0.5);
  c.n_paths = 16;
  PathBatch b(c, c.params, 10.0, 0.5);
  for (std::size_t i = 0; i < 8; ++i) CHECK(a.simulate(i).values == b.simulate(i).values);
}

TEST_CASE("reports are reproducible byte for byte") {
  const auto c = small_convergence();
  const auto r1 = run_estimator_convergence(c);
  auto c2 = c;
  c2.threads = 3;
  const auto r2 = run_estimator_convergence(c2);
  CHECK(report_csv(r1) == report_csv(r2));
  CHECK(r1.rows.size() == 2);
  CHECK(r1.rows[0].at("n_paths") == 8);
}

TEST_CASE("first-kind pairing follows the scheme") {
  CHECK(first_kind_options_for(Scheme::Euler).rule == ResolventRule::PointValues);
  CHECK(first_kind_options_for(Scheme::EulerProduct).atom_on_weights);
  CHECK(first_kind_options_for(Scheme::Resolvent).rule == ResolventRule::ProductIntegration);
}

TEST_CASE("law of large numbers for the centred classical OU process") {
  ExperimentConfig c;
  c.kernel = KernelSpec::constant_one();
  c.params = {0.0, -1.0, 0.3, 0.0};
  c.scheme = Scheme::Resolvent;
  c.horizons = {50.0};
  c.dts = {0.1};
  c.n_paths = 100;
  c.threads = 1;
  const auto r = run_lln(c);
  REQUIRE(r.rows.size() == 1);
  const auto& row = r.rows[0];
  CHECK(row.at("target_m1").get<double>() == 0.0);
  CHECK(std::abs(row.at("mean_m1").get<double>()) <= 3 * row.at("se_m1").get<double>());
  CHECK(row.at("target_m2").get<double>() == Approx(0.045).epsilon(1e-3));
  CHECK(std::abs(row.at("mean_m2").get<double>() - 0.045) <= 3 * row.at("se_m2").get<double>() + 0.045 * 0.02);
}

TEST_CASE("mixing experiment on the exponential kernel") {
  auto c = preset_config("mixing-expsum");
  c.threads = 1;
  const auto r = run_mixing_decay(c);
  CHECK(r.summary.at("analytic_monotone").get<bool>());
  for (const auto& row : r.rows) {
    const double lag = row.at("lag").get<double>();
    if (row.at("f") == "x" && (lag == 2.0 || lag == 20.0)) {
      CAPTURE(lag);
      CHECK(std::abs(row.at("z_score").get<double>()) <= 3.0);
    }
  }
  auto bad = c;
  bad.scheme = Scheme::Euler;
  CHECK_THROWS_AS(run_mixing_decay(bad), ValidationError);
}

TEST_CASE("strong consistency schedules") {
  double partial = 0.0;
  CHECK(consistency_summable({ConsistencySequence::Kind::Power, 0.5}, 4.0, &partial));
  CHECK(partial > 0.0);
  CHECK_FALSE(consistency_summable({ConsistencySequence::Kind::Power, 0.5}, 1.0));
  CHECK_FALSE(consistency_summable({ConsistencySequence::Kind::Geometric, 2.0}, 4.0));
  ExperimentConfig c;
  CHECK_THROWS_AS(run_strong_consistency_demo(c, {ConsistencySequence::Kind::Geometric, 2.0}), ValidationError);
}
