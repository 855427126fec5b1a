#pragma once

#include <vector>

#include <Eigen/Dense>

namespace veracity {

// Jensen-Shannon divergence in bits; inputs must be simplex vectors of equal length.
double js_divergence(const std::vector<double>& p, const std::vector<double>& q);

struct KsResult {
  double statistic = 0;  // sup |ECDF_a - ECDF_b|
  double p_value = 1;    // asymptotic Kolmogorov distribution at sqrt(nm/(n+m)) * D
};

KsResult ks_test(std::vector<double> a, std::vector<double> b);

// Survival function of the limiting Kolmogorov distribution, P(K > x).
double kolmogorov_sf(double x);

struct TTestResult {
  double statistic = 0;
  double dof = 0;
  double p_value = 1;  // two-sided
};

// Unequal-variance (Welch) two-sample t-test. Each sample needs >= 2 values.
TTestResult welch_t_test(const std::vector<double>& a, const std::vector<double>& b);

struct ZTestResult {
  double statistic = 0;
  double p_value = 1;  // two-sided
};

// Pooled two-proportion z-test of x1/n1 against x2/n2.
ZTestResult two_proportion_test(int x1, int n1, int x2, int n2);

// sigma * (1 - mu) over relative exposure durations, population sigma.
double text_dynamism(const std::vector<double>& relative_durations);

// Distinct colors after keeping the top 4 bits of each RGB channel. pixels: P x 3 in [0, 255].
int color_richness(const Eigen::MatrixXd& pixels);

}  // namespace veracity
