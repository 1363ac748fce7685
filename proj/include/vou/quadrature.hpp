#pragma once

#include <array>
#include <cmath>
#include <cstddef>

namespace vou {

// 16-point Gauss-Legendre rule mapped to [0, 1].
struct GaussRule {
  static constexpr std::size_t kPoints = 16;
  std::array<double, kPoints> nodes;
  std::array<double, kPoints> weights;
};

const GaussRule& gauss_legendre_16();

template <class F>
double integrate_cell(F&& f, double a, double b) {
  const auto& rule = gauss_legendre_16();
  const double h = b - a;
  double acc = 0.0;
  for (std::size_t q = 0; q < GaussRule::kPoints; ++q) {
    acc += rule.weights[q] * f(a + h * rule.nodes[q]);
  }
  return acc * h;
}

// Integrates f over (0, b] through u = b w^p. Choosing p = 1/(1 - kappa) turns
// an integrand ~ u^(-kappa) into a smooth one in w.
template <class F>
double integrate_from_zero(F&& f, double b, double p) {
  const auto& rule = gauss_legendre_16();
  double acc = 0.0;
  for (std::size_t q = 0; q < GaussRule::kPoints; ++q) {
    const double w = rule.nodes[q];
    const double wp1 = std::pow(w, p - 1.0);
    acc += rule.weights[q] * f(b * wp1 * w) * p * wp1;
  }
  return acc * b;
}

}  // namespace vou
