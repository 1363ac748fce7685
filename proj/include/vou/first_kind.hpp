#pragma once

#include <cstddef>
#include <vector>

#include "vou/kernel.hpp"

namespace vou {

// How K enters the discrete convolution K * L on a uniform grid.
//   ProductIntegration: cell averages of K, W_m = (1/dt) int_{(m-1)dt}^{m dt} K.
//   PointValues:        W_m = K(m dt), the weights of the explicit Euler scheme.
enum class ResolventRule { ProductIntegration, PointValues };

enum class FirstKindMethod {
  Deconvolution,  // forward substitution of the discrete identity
  Analytic,       // fractional kernel only: exact masses of t^(-alpha)/Gamma(1-alpha)
};

struct FirstKindOptions {
  ResolventRule rule = ResolventRule::ProductIntegration;
  FirstKindMethod method = FirstKindMethod::Deconvolution;
  // Atom term weighted by W_k instead of K(t_k). With cell-averaged weights this makes L the
  // exact inverse of the cell-averaged explicit scheme; it only matters when K(0+) is finite.
  bool atom_on_weights = false;
};

// L = atom * delta_0 + sum_j masses[j-1] * (mass on ((j-1)dt, j dt]).
struct FirstKindResolvent {
  KernelSpec kernel;
  double grid_step = 0.0;
  double atom = 0.0;
  std::vector<double> interval_masses;
  std::vector<double> cumulative_masses;  // L((0, t_k]) for k = 0..n
  ResolventRule rule = ResolventRule::ProductIntegration;
  FirstKindMethod method = FirstKindMethod::Deconvolution;
  bool atom_on_weights = false;

  std::size_t steps() const noexcept { return interval_masses.size(); }
  double horizon() const noexcept { return grid_step * static_cast<double>(steps()); }
  double cumulative(std::size_t k) const { return cumulative_masses.at(k); }
};

// Convolution weights W_1..W_n (index 0 unused).
std::vector<double> kernel_weights(const KernelSpec& kernel, double dt, std::size_t n, ResolventRule rule);

FirstKindResolvent first_kind_resolvent(const KernelSpec& kernel, double dt, double horizon,
                                        FirstKindOptions options = {});

// Merge groups of `factor` consecutive cells.
FirstKindResolvent coarsen(const FirstKindResolvent& resolvent, std::size_t factor);

// max_k |atom K(t_k) + sum_j L_j W_{k-j+1} - 1|, with the weights recomputed from the kernel.
double first_kind_identity_defect(const FirstKindResolvent& resolvent);

struct GrowthReport {
  std::vector<double> t;
  std::vector<double> cumulative;   // L((0, t])
  std::vector<double> bound_ratio;  // L((0, t]) K(t), at most 1
  std::vector<double> power_ratio;  // L((0, t]) / t^(1-alpha), fractional kernels only
  double max_bound_ratio = 0.0;
  bool violated = false;
};

// Evaluated at grid points t >= 1.
GrowthReport resolvent_growth_check(const FirstKindResolvent& resolvent);

}  // namespace vou
