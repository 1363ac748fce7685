#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <cstdint>
#include <functional>
#include <memory>
#include <mutex>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "json.hpp"
#include "vou/estimators.hpp"
#include "vou/first_kind.hpp"
#include "vou/kernel.hpp"
#include "vou/simulator.hpp"

namespace vou {

struct ExperimentConfig {
  std::string name = "default";
  std::string preset = "paper";
  KernelSpec kernel = KernelSpec::fractional(0.75);
  VouParams params;
  Scheme scheme = Scheme::Euler;
  std::vector<double> horizons{200.0};
  std::vector<double> dts{0.2};
  std::size_t n_paths = 200;
  std::uint64_t seed = 20240611;
  std::vector<EstimatorMethod> estimators{EstimatorMethod::MLE};
  std::vector<std::pair<double, double>> parameter_grid;  // (b, beta) pairs
  std::size_t fine_factor = 1;           // m = fine_factor * n
  bool fine_terminal = false;            // Z^{P_m} for the terminal value too
  std::size_t resolvent_refinement = 4;  // resolvent grid = path grid / refinement
  double burn_in = -1.0;                 // stationary scheme; < 0 selects automatically
  std::vector<double> lags{1.0, 2.0, 5.0, 10.0};
  std::size_t threads = 0;  // 0 = hardware concurrency

  void validate() const;
  friend bool operator==(const ExperimentConfig&, const ExperimentConfig&) = default;
};

// Rows are flat JSON objects sharing `columns`; summary holds everything else.
struct ExperimentReport {
  std::string experiment;
  std::vector<std::string> columns;
  std::vector<nlohmann::json> rows;
  nlohmann::json summary = nlohmann::json::object();
};

// First-kind resolvent that inverts the scheme's discrete convolution.
FirstKindOptions first_kind_options_for(Scheme scheme);

// Path factory for one (params, T, dt) cell: simulation on the fine grid dt / fine_factor
// plus the first-kind resolvent that matches the scheme.
class PathBatch {
 public:
  PathBatch(const ExperimentConfig& config, const VouParams& params, double horizon, double dt,
            bool retain_noise = false);
  SamplePath simulate(std::size_t index) const;
  const FirstKindResolvent& first_kind() const noexcept { return first_kind_; }
  std::size_t stride() const noexcept { return stride_; }
  double fine_step() const noexcept { return fine_dt_; }
  const std::string& warning() const noexcept { return warning_; }

 private:
  std::uint64_t seed_;
  std::size_t stride_;
  double fine_dt_;
  std::function<SamplePath(std::uint64_t)> simulate_;
  std::shared_ptr<const SecondKindResolvent> resolvent_;
  FirstKindResolvent first_kind_;
  std::string warning_;
};

// Runs f(i) for i in [0, count) on up to `threads` workers; results are ordered by index.
std::size_t effective_threads(std::size_t requested);

template <class R>
std::vector<R> parallel_map(std::size_t count, std::size_t threads, const std::function<R(std::size_t)>& f) {
  std::vector<R> out(count);
  const std::size_t workers = std::min(effective_threads(threads), std::max<std::size_t>(count, 1));
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) out[i] = f(i);
    return out;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) {
        try {
          out[i] = f(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(failure_mutex);
          if (!failure) failure = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
  return out;
}

ExperimentReport run_lln(const ExperimentConfig& config);
ExperimentReport run_estimator_convergence(const ExperimentConfig& config);
ExperimentReport run_normality(const ExperimentConfig& config);
ExperimentReport run_mixing_decay(const ExperimentConfig& config);

struct ConsistencySequence {
  enum class Kind { Power, Geometric };
  Kind kind = Kind::Power;
  double parameter = 0.5;  // kappa for T_n = n^kappa, q for T_n = q^n
};

// Sum_n |1 - T_n / T_{n+1}|^p: true when the partial sums settle (ratio test on doubling blocks).
bool consistency_summable(const ConsistencySequence& seq, double p, double* partial_sum = nullptr);

ExperimentReport run_strong_consistency_demo(const ExperimentConfig& config, const ConsistencySequence& seq,
                                             double p = 4.0);

}  // namespace vou
