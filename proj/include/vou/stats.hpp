#pragma once

#include <cstddef>
#include <functional>
#include <vector>

namespace vou {

// P(D_n < d) for the one-sample Kolmogorov statistic (Marsaglia, Tsang and Wang).
// Exact for n <= 10000; larger samples use the limiting Kolmogorov series.
double kolmogorov_cdf(std::size_t n, double d);

struct KsResult {
  double statistic = 0.0;
  double p_value = 1.0;
  std::size_t n = 0;
};

KsResult ks_test(std::vector<double> sample, const std::function<double(double)>& cdf);
KsResult ks_test_standard_normal(std::vector<double> sample);

double normal_cdf(double x);

struct Summary {
  double mean = 0.0;
  double sd = 0.0;  // sample standard deviation (n - 1)
  double se = 0.0;  // sd / sqrt(n)
  std::size_t n = 0;
};

Summary summarize(const std::vector<double>& x);
// Sample covariance with divisor n - 1.
double sample_covariance(const std::vector<double>& a, const std::vector<double>& b);

}  // namespace vou
