#include <gtest/gtest.h>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <numbers>

#include "fluctlab/dist.hpp"
#include "fluctlab/rng.hpp"

using namespace fluctlab;

namespace {

std::vector<double> normal_sample(std::size_t n, std::uint64_t seed) {
  const CounterRng rng({seed, 0});
  std::vector<double> out;
  for (std::uint32_t k = 0; out.size() < n; ++k) {
    const auto u = rng.pair(Stream::Auxiliary, k, 0);
    const double r = std::sqrt(-2.0 * std::log1p(-u[0]));
    out.push_back(r * std::cos(2.0 * std::numbers::pi * u[1]));
  }
  return out;
}

} // namespace

TEST(Gaussian, Examples) {
  EXPECT_EQ(gaussian_cdf(0.0), 0.5);
  for (double x : {0.1, 0.7, 1.5, 3.2, 6.0}) EXPECT_NEAR(gaussian_cdf(x), 1.0 - gaussian_cdf(-x), 1e-14);
  const double q = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
      [](double t) { return std::exp(-0.5 * t * t) / std::sqrt(2.0 * std::numbers::pi); }, -40.0, 1.959964, 10, 1e-15);
  EXPECT_NEAR(gaussian_cdf(1.959964), q, 1e-12);
  EXPECT_NEAR(gaussian_cdf(1.959964), 0.975, 1e-6);
}

TEST(Gaussian, ProductForms) {
  EXPECT_NEAR(g2_product_cdf(0.0, 1.0), 0.25, 1e-15);
  for (double c : {0.3, 1.0, 2.5})
    for (double x : {-1.0, 0.0, 0.4, 2.0}) EXPECT_NEAR(g2_product_cdf(x, c), g2_product_cdf(x, 1.0 / c), 1e-15);
  const double rp = 0.6, rm = 0.2, x = 0.8;
  const double a = 1.0 / std::sqrt(4 * rp * (1 - rp)), b = 1.0 / std::sqrt(4 * rm * (1 - rm));
  EXPECT_NEAR(gaussian_product_cdf(x, a, b), gaussian_cdf(a * x) * gaussian_cdf(b * x), 1e-15);
  EXPECT_THROW(g2_product_cdf(1.0, 0.0), InvalidArgument);
}

TEST(Ecdf, Basics) {
  const Ecdf e({3.0, 1.0, 2.0, 2.0});
  EXPECT_EQ(e.count(), 4u);
  EXPECT_EQ(e.sorted(), (std::vector<double>{1, 2, 2, 3}));
  EXPECT_EQ(e(1.5), 0.25);
  EXPECT_EQ(e(2.0), 0.75);
  EXPECT_THROW(Ecdf({}), InvalidArgument);
  EXPECT_THROW(Ecdf({1.0, NAN}), InvalidArgument);
}

TEST(Ks, Examples) {
  EXPECT_NEAR(ks_statistic(Ecdf({0.0}), gaussian_cdf), 0.5, 1e-15);
  const Ecdf e(normal_sample(500, 3));
  EXPECT_EQ(ks_statistic(e, e), 0.0);
  EXPECT_EQ(ks_statistic(Ecdf({1.0, 2.0}), Ecdf({3.0, 4.0})), 1.0);
}

TEST(Ks, SampleFromReference) {
  const std::size_t n = 10000;
  const Ecdf e(normal_sample(n, 4));
  EXPECT_LT(ks_statistic(e, gaussian_cdf), 1.95 / std::sqrt(static_cast<double>(n)));
  EXPECT_GT(ks_statistic(e, [](double x) { return gaussian_cdf(x - 0.5); }), 0.15);
}

TEST(Ks, OrderStatisticFormulaIsExact) {
  // Brute force: sup over a fine grid plus left/right limits at data points.
  const std::vector<double> s{-0.3, 0.2, 0.2, 1.4, -2.0};
  const Ecdf e(s);
  double d = 0.0;
  for (double x : e.sorted()) {
    d = std::max(d, std::abs(e(x) - gaussian_cdf(x)));
    d = std::max(d, std::abs(e(std::nextafter(x, -INFINITY)) - gaussian_cdf(x)));
  }
  EXPECT_NEAR(ks_statistic(e, gaussian_cdf), d, 1e-15);
}

TEST(Summary, Examples) {
  const auto c = summarize(std::vector<double>(10, 3.5));
  EXPECT_EQ(c.variance, 0.0);
  EXPECT_EQ(c.mean, 3.5);

  const std::size_t n = 100;
  std::vector<double> two;
  for (std::size_t k = 0; k < n; ++k) two.push_back(k % 2 ? 1.0 : -1.0);
  EXPECT_NEAR(summarize(two).variance, static_cast<double>(n) / (n - 1), 1e-12);
  EXPECT_NEAR(summarize(two).skewness, 0.0, 1e-12);

  const auto g = summarize(normal_sample(10000, 5));
  EXPECT_LT(std::abs(g.mean), 3.0 / std::sqrt(10000.0));
  EXPECT_NEAR(g.mean_se, 0.01, 0.001);
  EXPECT_NEAR(g.variance, 1.0, 0.05);
  EXPECT_LT(std::abs(g.skewness), 3.0 * g.skewness_se);
  EXPECT_NEAR(g.skewness_se, std::sqrt(6.0 / 10000), 0.005);
  EXPECT_THROW(summarize(std::vector<double>{1.0}), InvalidArgument);
}

TEST(Summary, ExponentialSkewness) {
  const CounterRng rng({6, 0});
  std::vector<double> x;
  for (std::uint32_t k = 0; k < 20000; ++k) x.push_back(exponential_from_unit(rng.uniform(Stream::Auxiliary, k), 1.0));
  const auto s = summarize(x);
  EXPECT_LT(std::abs(s.skewness - 2.0), 4.0 * s.skewness_se);
  EXPECT_LT(std::abs(s.variance - 1.0), 4.0 * s.variance_se);
}

TEST(FitLine, ExactLine) {
  const auto f = fit_line({1, 2, 3, 4}, {3, 5, 7, 9});
  EXPECT_NEAR(f.slope, 2.0, 1e-14);
  EXPECT_NEAR(f.intercept, 1.0, 1e-14);
  EXPECT_THROW(fit_line({1, 1}, {2, 3}), InvalidArgument);
}
