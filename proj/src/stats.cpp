#include "vou/stats.hpp"

#include <algorithm>
#include <cmath>

#include "vou/error.hpp"

namespace vou {

namespace {

using Matrix = std::vector<double>;

void multiply(const Matrix& a, const Matrix& b, Matrix& c, int m) {
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < m; ++j) {
      double s = 0.0;
      for (int k = 0; k < m; ++k) s += a[i * m + k] * b[k * m + j];
      c[i * m + j] = s;
    }
  }
}

// v = a^n with a decimal exponent carried separately to avoid overflow.
void power(const Matrix& a, int ea, Matrix& v, int& ev, int m, std::size_t n) {
  if (n == 1) {
    v = a;
    ev = ea;
    return;
  }
  power(a, ea, v, ev, m, n / 2);
  Matrix b(m * m);
  multiply(v, v, b, m);
  int eb = 2 * ev;
  if (n % 2 == 0) {
    v = b;
    ev = eb;
  } else {
    multiply(a, b, v, m);
    ev = ea + eb;
  }
  if (v[(m / 2) * m + m / 2] > 1e140) {
    for (double& x : v) x *= 1e-140;
    ev += 140;
  }
}

double kolmogorov_limit(double x) {
  if (x <= 0.0) return 0.0;
  double s = 0.0;
  for (int k = 1; k <= 100; ++k) {
    const double t = std::exp(-2.0 * k * k * x * x);
    s += (k % 2 ? 1.0 : -1.0) * t;
    if (t < 1e-18) break;
  }
  return std::clamp(1.0 - 2.0 * s, 0.0, 1.0);
}

}  // namespace

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

double kolmogorov_cdf(std::size_t n, double d) {
  if (n == 0) throw DomainError("Kolmogorov distribution needs n >= 1");
  if (d <= 0.0) return 0.0;
  if (d >= 1.0) return 1.0;
  const double nd = static_cast<double>(n);
  if (n > 10000) {
    const double rn = std::sqrt(nd);
    return kolmogorov_limit((rn + 0.12 + 0.11 / rn) * d);
  }
  const double s0 = d * d * nd;
  // Far tail: the p-value is below 1e-6 and the matrix would be large.
  if (s0 > 7.24) return 1.0 - 2.0 * std::exp(-(2.000071 + 0.331 / std::sqrt(nd) + 1.409 / nd) * s0);

  const int k = static_cast<int>(nd * d) + 1;
  const int m = 2 * k - 1;
  const double h = k - nd * d;
  Matrix H(m * m);
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < m; ++j) H[i * m + j] = (i - j + 1 < 0) ? 0.0 : 1.0;
  }
  for (int i = 0; i < m; ++i) {
    H[i * m] -= std::pow(h, i + 1);
    H[(m - 1) * m + i] -= std::pow(h, m - i);
  }
  H[(m - 1) * m] += (2 * h - 1 > 0 ? std::pow(2 * h - 1, m) : 0.0);
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < m; ++j) {
      if (i - j + 1 > 0) {
        for (int g = 1; g <= i - j + 1; ++g) H[i * m + j] /= g;
      }
    }
  }
  Matrix Q;
  int eq = 0;
  power(H, 0, Q, eq, m, n);
  double s = Q[(k - 1) * m + k - 1];
  for (std::size_t i = 1; i <= n; ++i) {
    s = s * static_cast<double>(i) / nd;
    if (s < 1e-140) {
      s *= 1e140;
      eq -= 140;
    }
  }
  return std::clamp(s * std::pow(10.0, eq), 0.0, 1.0);
}

KsResult ks_test(std::vector<double> sample, const std::function<double(double)>& cdf) {
  if (sample.empty()) throw DomainError("KS test needs a non-empty sample");
  std::sort(sample.begin(), sample.end());
  const double n = static_cast<double>(sample.size());
  double d = 0.0;
  for (std::size_t i = 0; i < sample.size(); ++i) {
    const double f = cdf(sample[i]);
    d = std::max({d, (i + 1) / n - f, f - i / n});
  }
  KsResult r;
  r.statistic = d;
  r.n = sample.size();
  r.p_value = std::clamp(1.0 - kolmogorov_cdf(sample.size(), d), 0.0, 1.0);
  return r;
}

KsResult ks_test_standard_normal(std::vector<double> sample) { return ks_test(std::move(sample), normal_cdf); }

Summary summarize(const std::vector<double>& x) {
  Summary s;
  s.n = x.size();
  if (x.empty()) return s;
  for (double v : x) s.mean += v;
  s.mean /= static_cast<double>(x.size());
  if (x.size() > 1) {
    double q = 0.0;
    for (double v : x) q += (v - s.mean) * (v - s.mean);
    s.sd = std::sqrt(q / static_cast<double>(x.size() - 1));
    s.se = s.sd / std::sqrt(static_cast<double>(x.size()));
  }
  return s;
}

double sample_covariance(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size() || a.size() < 2) throw DomainError("covariance needs two equal samples of size >= 2");
  const Summary sa = summarize(a), sb = summarize(b);
  double q = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) q += (a[i] - sa.mean) * (b[i] - sb.mean);
  return q / static_cast<double>(a.size() - 1);
}

}  // namespace vou
