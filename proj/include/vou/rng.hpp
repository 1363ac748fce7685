#pragma once

#include <cstdint>
#include <random>
#include <span>

#include <boost/random/normal_distribution.hpp>

namespace vou {

std::uint64_t splitmix64(std::uint64_t x) noexcept;

// Seed of path `index` in a batch: splitmix64(master + golden * (index + 1)).
// Path i never depends on how many other paths are drawn.
std::uint64_t path_seed(std::uint64_t master, std::uint64_t index) noexcept;

// Standard normal draws: mt19937_64 engine, Boost ziggurat normal distribution.
class NormalStream {
 public:
  explicit NormalStream(std::uint64_t seed) : engine_(seed) {}
  double operator()() { return dist_(engine_); }
  void fill(std::span<double> out) {
    for (double& x : out) x = dist_(engine_);
  }

 private:
  std::mt19937_64 engine_;
  boost::random::normal_distribution<double> dist_{0.0, 1.0};
};

}  // namespace vou
