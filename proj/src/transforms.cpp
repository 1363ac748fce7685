#include "vou/transforms.hpp"

#include <cmath>

#include "vou/error.hpp"
#include "vou/grid.hpp"

namespace vou {

namespace {

void check_path(const PathOnGrid& p) {
  if (p.values.size() < 2) throw UsageError("path needs at least two samples");
  if (!(p.grid_step > 0.0)) throw UsageError("path grid step must be positive");
}

double z_at(const std::vector<double>& x, double x0, const FirstKindResolvent& L, std::size_t k) {
  const auto& m = L.interval_masses;
  double s = L.atom > 0.0 ? L.atom * (x[k] - x0) : 0.0;
  for (std::size_t j = 1; j <= k; ++j) s += (x[k - j + 1] - x0) * m[j - 1];
  return s;
}

}  // namespace

PathOnGrid z_transform(const PathOnGrid& path, const FirstKindResolvent& L) {
  check_path(path);
  const std::size_t factor = nesting_factor(L.grid_step, path.grid_step);
  const FirstKindResolvent coarse = coarsen(L, factor);
  const std::size_t n = path.steps();
  if (coarse.steps() < n) throw UsageError("first-kind resolvent horizon is shorter than the path");
  PathOnGrid z{std::vector<double>(n + 1, 0.0), path.grid_step, 0.0};
  for (std::size_t k = 1; k <= n; ++k) z.values[k] = z_at(path.values, path.x0, coarse, k);
  return z;
}

std::vector<double> z_on_fine_grid(const PathOnGrid& fine_path, const FirstKindResolvent& L, std::size_t stride) {
  check_path(fine_path);
  if (stride == 0) throw UsageError("stride must be positive");
  if (nesting_factor(L.grid_step, fine_path.grid_step) != 1) {
    throw UsageError("fine path and first-kind resolvent must share the grid");
  }
  const std::size_t n = fine_path.steps();
  if (n % stride != 0) throw UsageError("coarse grid does not nest in the fine grid");
  if (L.steps() < n) throw UsageError("first-kind resolvent horizon is shorter than the path");
  std::vector<double> out(n / stride + 1, 0.0);
  for (std::size_t c = 1; c < out.size(); ++c) out[c] = z_at(fine_path.values, fine_path.x0, L, c * stride);
  return out;
}

PathOnGrid gamma_transform(const PathOnGrid& z, const KernelSpec& kernel) {
  check_path(z);
  if (std::abs(z.values[0]) > 1e-14) throw UsageError("Gamma transform needs z_0 = 0");
  const std::size_t n = z.steps();
  const double dt = z.grid_step;
  std::vector<double> kv(n + 1, 0.0), d0(n + 1, 0.0), d1(n + 1, 0.0);
  for (std::size_t m = 1; m <= n; ++m) {
    kv[m] = kernel.value(m * dt);
    d1[m] = (dt * kv[m] - kernel.integral((m - 1) * dt, m * dt)) / dt;
    if (m >= 2) d0[m] = kv[m] - kv[m - 1];
  }
  const auto& v = z.values;
  PathOnGrid g{std::vector<double>(n + 1, 0.0), dt, 0.0};
  for (std::size_t k = 1; k <= n; ++k) {
    const double zk = v[k];
    double s = kv[k] * zk + (v[k - 1] - v[k]) * d1[1];
    for (std::size_t m = 2; m <= k; ++m) {
      const double near = v[k - m + 1];
      s += (near - zk) * d0[m] + (v[k - m] - near) * d1[m];
    }
    g.values[k] = s;
  }
  return g;
}

}  // namespace vou
