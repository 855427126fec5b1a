#include "veracity/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>
#include <stdexcept>

#include <boost/math/distributions/normal.hpp>
#include <boost/math/distributions/students_t.hpp>

namespace veracity {

namespace {

void check_simplex(const std::vector<double>& p, const char* name) {
  double sum = 0;
  for (double v : p) {
    if (!(v >= 0)) throw std::invalid_argument(std::string("js_divergence: negative or NaN entry in ") + name);
    sum += v;
  }
  if (std::abs(sum - 1.0) > 1e-6) throw std::invalid_argument(std::string("js_divergence: ") + name + " does not sum to 1");
}

double mean_of(const std::vector<double>& v) {
  double s = 0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

double sample_variance(const std::vector<double>& v, double mean) {
  double s = 0;
  for (double x : v) s += (x - mean) * (x - mean);
  return s / static_cast<double>(v.size() - 1);
}

}  // namespace

double js_divergence(const std::vector<double>& p, const std::vector<double>& q) {
  if (p.size() != q.size() || p.empty()) throw std::invalid_argument("js_divergence: length mismatch");
  check_simplex(p, "P");
  check_simplex(q, "Q");
  double out = 0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double m = 0.5 * (p[i] + q[i]);
    if (p[i] > 0) out += 0.5 * p[i] * std::log2(p[i] / m);
    if (q[i] > 0) out += 0.5 * q[i] * std::log2(q[i] / m);
  }
  return std::clamp(out, 0.0, 1.0);
}

double kolmogorov_sf(double x) {
  if (x <= 0) return 1.0;
  if (x < 1.18) {
    // CDF = sqrt(2 pi)/x * sum exp(-(2k-1)^2 pi^2 / (8 x^2)), fast for small x.
    const double c = std::numbers::pi * std::numbers::pi / (8 * x * x);
    double cdf = 0;
    for (int k = 1; k <= 50; ++k) {
      const double term = std::exp(-(2 * k - 1) * (2 * k - 1) * c);
      cdf += term;
      if (term < 1e-300) break;
    }
    cdf *= std::sqrt(2 * std::numbers::pi) / x;
    return std::clamp(1.0 - cdf, 0.0, 1.0);
  }
  double sf = 0;
  for (int k = 1; k <= 100; ++k) {
    const double term = std::exp(-2.0 * k * k * x * x);
    sf += (k % 2 == 1 ? 2.0 : -2.0) * term;
    if (term < 1e-300) break;
  }
  return std::clamp(sf, 0.0, 1.0);
}

KsResult ks_test(std::vector<double> a, std::vector<double> b) {
  if (a.empty() || b.empty()) throw std::invalid_argument("ks_test: empty sample");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double n = static_cast<double>(a.size()), m = static_cast<double>(b.size());
  std::size_t i = 0, j = 0;
  double d = 0;
  while (i < a.size() && j < b.size()) {
    const double x = std::min(a[i], b[j]);
    while (i < a.size() && a[i] == x) ++i;
    while (j < b.size() && b[j] == x) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / n - static_cast<double>(j) / m));
  }
  KsResult r;
  r.statistic = d;
  r.p_value = kolmogorov_sf(std::sqrt(n * m / (n + m)) * d);
  return r;
}

TTestResult welch_t_test(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() < 2 || b.size() < 2) throw std::invalid_argument("welch_t_test: each sample needs at least 2 values");
  const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
  const double ma = mean_of(a), mb = mean_of(b);
  const double va = sample_variance(a, ma) / na, vb = sample_variance(b, mb) / nb;
  TTestResult r;
  if (va + vb == 0) {
    r.statistic = ma == mb ? 0.0 : std::copysign(INFINITY, ma - mb);
    r.dof = na + nb - 2;
    r.p_value = ma == mb ? 1.0 : 0.0;
    return r;
  }
  r.statistic = (ma - mb) / std::sqrt(va + vb);
  r.dof = (va + vb) * (va + vb) / (va * va / (na - 1) + vb * vb / (nb - 1));
  const boost::math::students_t dist(r.dof);
  r.p_value = std::clamp(2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(r.statistic))), 0.0, 1.0);
  return r;
}

ZTestResult two_proportion_test(int x1, int n1, int x2, int n2) {
  if (n1 <= 0 || n2 <= 0 || x1 < 0 || x2 < 0 || x1 > n1 || x2 > n2)
    throw std::invalid_argument("two_proportion_test: bad counts");
  const double p1 = static_cast<double>(x1) / n1, p2 = static_cast<double>(x2) / n2;
  const double pooled = static_cast<double>(x1 + x2) / (n1 + n2);
  const double se = std::sqrt(pooled * (1 - pooled) * (1.0 / n1 + 1.0 / n2));
  ZTestResult r;
  if (se == 0) return r;
  r.statistic = (p1 - p2) / se;
  const boost::math::normal_distribution<> z;
  r.p_value = std::clamp(2.0 * boost::math::cdf(boost::math::complement(z, std::abs(r.statistic))), 0.0, 1.0);
  return r;
}

double text_dynamism(const std::vector<double>& d) {
  if (d.empty()) throw std::invalid_argument("text_dynamism: no durations");
  for (double x : d)
    if (!(x >= 0 && x <= 1)) throw std::invalid_argument("text_dynamism: durations must be fractions in [0,1]");
  const double mu = mean_of(d);
  double var = 0;
  for (double x : d) var += (x - mu) * (x - mu);
  var /= static_cast<double>(d.size());
  return std::sqrt(var) * (1 - mu);
}

int color_richness(const Eigen::MatrixXd& pixels) {
  if (pixels.cols() != 3) throw std::invalid_argument("color_richness: pixels must be P x 3");
  std::set<int> codes;
  for (Eigen::Index i = 0; i < pixels.rows(); ++i) {
    int code = 0;
    for (int c = 0; c < 3; ++c) {
      const double v = pixels(i, c);
      if (!(v >= 0 && v <= 255)) throw std::invalid_argument("color_richness: channel value outside [0,255]");
      code = code * 16 + (static_cast<int>(v) >> 4);
    }
    codes.insert(code);
  }
  return static_cast<int>(codes.size());
}

}  // namespace veracity
