#pragma once

#include <cstddef>
#include <vector>

#include "vou/first_kind.hpp"
#include "vou/kernel.hpp"

namespace vou {

// Samples x(t_k), k = 0..n, on a uniform grid; values[0] is the path at time 0.
struct PathOnGrid {
  std::vector<double> values;
  double grid_step = 0.0;
  double x0 = 0.0;

  std::size_t steps() const noexcept { return values.empty() ? 0 : values.size() - 1; }
  double horizon() const noexcept { return grid_step * static_cast<double>(steps()); }
};

// Z_{t_k}(x) = sum_{j=1}^k (x_{t_{k-j+1}} - x0) L((t_{j-1}, t_j]) + atom (x_{t_k} - x0).
// L may live on a grid refining the path's by an integer factor; its cells are merged.
PathOnGrid z_transform(const PathOnGrid& path, const FirstKindResolvent& L);

// Z of a fine-grid path (same grid as L) evaluated at every `stride`-th fine point.
std::vector<double> z_on_fine_grid(const PathOnGrid& fine_path, const FirstKindResolvent& L, std::size_t stride);

// Gamma_t(z) = K(t) z_t + int_0^t K'(t - s)(z_s - z_t) ds with z linear between grid
// points, so that every cell integral of K' is exact. Requires z_0 = 0.
PathOnGrid gamma_transform(const PathOnGrid& z, const KernelSpec& kernel);

}  // namespace vou
