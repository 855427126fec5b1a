#include <cmath>

#include "doctest.h"
#include "veracity/rng.hpp"
#include "veracity/stats.hpp"

using namespace veracity;

namespace {

const std::vector<double> kA{0.1, 0.4, 0.35, 0.8, 1.2, 0.05, 0.9};
const std::vector<double> kB{0.5, 1.5, 1.1, 0.95, 2.0, 1.7};

std::vector<double> linspace(double lo, double hi, int n) {
  std::vector<double> v;
  for (int i = 0; i < n; ++i) v.push_back(lo + (hi - lo) * i / (n - 1));
  return v;
}

}  // namespace

// Reference values below come from scipy.stats: kstwobign.sf (also at
// sqrt(nm/(n+m)) * D for the KS p-values; scipy's own ks_2samp "asymp" path
// uses the finite-n distribution instead), ttest_ind with equal_var=False,
// and the squared base-2 scipy.spatial.distance.jensenshannon.

TEST_CASE("Kolmogorov survival function against reference values") {
  const std::vector<std::pair<double, double>> ref{{0.3, 0.9999906941986655},   {0.8, 0.5441424115741981},
                                                   {1.0, 0.26999967167735456},  {1.18, 0.1234538094297657},
                                                   {1.5, 0.022217962616525127}, {2.5, 7.453306344157342e-06}};
  for (const auto& [x, sf] : ref) {
    INFO(x);
    CHECK(kolmogorov_sf(x) == doctest::Approx(sf).epsilon(1e-9));
  }
  CHECK(kolmogorov_sf(0) == 1.0);
  CHECK(kolmogorov_sf(-1) == 1.0);
  // The two series agree where they meet.
  CHECK(std::abs(kolmogorov_sf(1.18 - 1e-12) - kolmogorov_sf(1.18)) < 1e-9);
}

TEST_CASE("two-sample KS against reference values") {
  const KsResult r = ks_test(kA, kB);
  CHECK(r.statistic == doctest::Approx(0.6904761904761905).epsilon(1e-12));
  CHECK(r.p_value == doctest::Approx(0.09185575509389855).epsilon(1e-8));
  const KsResult l = ks_test(linspace(0, 1, 40), linspace(0.2, 1.3, 50));
  CHECK(l.statistic == doctest::Approx(0.28).epsilon(1e-12));
  CHECK(l.p_value == doctest::Approx(0.061339816229094256).epsilon(1e-8));
  CHECK(ks_test(kA, kA).statistic == 0.0);
  CHECK(ks_test(kA, kA).p_value == 1.0);
  CHECK_THROWS(ks_test({}, kB));
}

TEST_CASE("property: KS is invariant under a shared strictly increasing transform") {
  Rng rng(1);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<double> a, b;
    for (int i = 0; i < 15; ++i) a.push_back(rng.normal());
    for (int i = 0; i < 21; ++i) b.push_back(rng.normal(0.4, 1.5));
    const KsResult base = ks_test(a, b);
    for (auto& x : a) x = std::exp(x) * 3 + 1;
    for (auto& x : b) x = std::exp(x) * 3 + 1;
    const KsResult t = ks_test(a, b);
    CHECK(t.statistic == doctest::Approx(base.statistic).epsilon(1e-12));
    CHECK(t.p_value == doctest::Approx(base.p_value).epsilon(1e-12));
    CHECK(base.p_value >= 0);
    CHECK(base.p_value <= 1);
  }
}

TEST_CASE("Welch t-test against reference values") {
  const TTestResult r = welch_t_test(kA, kB);
  CHECK(r.statistic == doctest::Approx(-2.7081444560279087).epsilon(1e-12));
  CHECK(r.p_value == doctest::Approx(0.022925173067956314).epsilon(1e-9));
  CHECK(r.dof == doctest::Approx(9.524362371790664).epsilon(1e-12));
  const TTestResult flipped = welch_t_test(kB, kA);
  CHECK(flipped.statistic == doctest::Approx(-r.statistic));
  CHECK(flipped.p_value == doctest::Approx(r.p_value));
  CHECK_THROWS(welch_t_test({1.0}, kB));
}

TEST_CASE("Welch t-test with zero variance") {
  CHECK(welch_t_test({2, 2, 2}, {2, 2}).p_value == 1.0);
  const TTestResult r = welch_t_test({2, 2, 2}, {3, 3});
  CHECK(std::isinf(r.statistic));
  CHECK(r.p_value == 0.0);
}

TEST_CASE("two-proportion z-test against reference values") {
  const ZTestResult r = two_proportion_test(30, 50, 18, 50);
  CHECK(r.statistic == doctest::Approx(2.401922307076307).epsilon(1e-12));
  CHECK(r.p_value == doctest::Approx(0.016309171877754974).epsilon(1e-9));
  CHECK(two_proportion_test(0, 10, 0, 10).p_value == 1.0);
  CHECK_THROWS(two_proportion_test(11, 10, 0, 10));
  CHECK_THROWS(two_proportion_test(0, 0, 0, 10));
}

TEST_CASE("Jensen-Shannon divergence") {
  CHECK(js_divergence({0.5, 0.5}, {1, 0}) == doctest::Approx(0.3112781244591328).epsilon(1e-12));
  CHECK(js_divergence({1, 0}, {0, 1}) == doctest::Approx(1.0));
  CHECK(js_divergence({0.2, 0.8}, {0.2, 0.8}) == 0.0);
  CHECK_THROWS(js_divergence({0.5, 0.6}, {0.5, 0.5}));
  CHECK_THROWS(js_divergence({1.5, -0.5}, {0.5, 0.5}));
  CHECK_THROWS(js_divergence({1}, {0.5, 0.5}));
}

TEST_CASE("property: JSD is symmetric, bounded by 1 bit, zero only on equal inputs") {
  Rng rng(2);
  for (int trial = 0; trial < 300; ++trial) {
    const auto k = static_cast<std::size_t>(rng.uniform_int(2, 9));
    std::vector<double> p(k), q(k);
    double sp = 0, sq = 0;
    for (std::size_t i = 0; i < k; ++i) sp += p[i] = rng.uniform(), sq += q[i] = rng.uniform();
    for (std::size_t i = 0; i < k; ++i) p[i] /= sp, q[i] /= sq;
    const double d = js_divergence(p, q);
    CHECK(d == doctest::Approx(js_divergence(q, p)).epsilon(1e-12));
    CHECK(d > 0);
    CHECK(d <= 1);
    CHECK(js_divergence(p, p) == doctest::Approx(0).epsilon(1e-15));
  }
}

TEST_CASE("text dynamism") {
  CHECK(text_dynamism({0.3}) == 0.0);
  CHECK(text_dynamism({0.0, 1.0}) == doctest::Approx(0.25));
  // mu = 0.2, population sigma = 0.1
  CHECK(text_dynamism({0.1, 0.3}) == doctest::Approx(0.08));
  CHECK_THROWS(text_dynamism({}));
  CHECK_THROWS(text_dynamism({0.5, 1.2}));
}

TEST_CASE("property: text dynamism lies in [0, 0.5] for fractions") {
  Rng rng(3);
  for (int trial = 0; trial < 500; ++trial) {
    std::vector<double> d;
    const auto n = rng.uniform_int(1, 12);
    for (int i = 0; i < n; ++i) d.push_back(rng.bernoulli(0.3) ? static_cast<double>(rng.uniform_int(0, 1)) : rng.uniform());
    const double v = text_dynamism(d);
    CHECK(v >= 0);
    CHECK(v <= 0.5);
  }
}

TEST_CASE("color richness counts 12-bit color codes") {
  Eigen::MatrixXd px(4, 3);
  px << 0, 0, 0,  //
      15, 15, 15,  // same code as black
      16, 0, 0,    //
      255, 255, 255;
  CHECK(color_richness(px) == 3);
  CHECK(color_richness(Eigen::MatrixXd(0, 3)) == 0);
  CHECK_THROWS(color_richness(Eigen::MatrixXd::Zero(2, 4)));
  px(0, 0) = 256;
  CHECK_THROWS(color_richness(px));
}
