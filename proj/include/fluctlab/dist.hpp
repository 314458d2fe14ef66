#pragma once

// Empirical distributions, KS distances and moment summaries.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numbers>
#include <vector>

#include "fluctlab/error.hpp"

namespace fluctlab {

/// Standard normal distribution function.
inline double gaussian_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

/// G1(a x) G1(b x).
inline double gaussian_product_cdf(double x, double a, double b) { return gaussian_cdf(a * x) * gaussian_cdf(b * x); }

/// G1(c x) G1(x / c).
inline double g2_product_cdf(double x, double c) {
  detail::require(c > 0.0, "g2_product_cdf: c must be positive");
  return gaussian_product_cdf(x, c, 1.0 / c);
}

class Ecdf {
public:
  explicit Ecdf(std::vector<double> sample) : x_(std::move(sample)) {
    detail::require(!x_.empty(), "Ecdf: empty sample");
    for (double v : x_) detail::require(!std::isnan(v), "Ecdf: NaN in sample");
    std::sort(x_.begin(), x_.end());
  }

  std::size_t count() const { return x_.size(); }
  const std::vector<double>& sorted() const { return x_; }

  double operator()(double t) const {
    const auto k = std::upper_bound(x_.begin(), x_.end(), t) - x_.begin();
    return static_cast<double>(k) / static_cast<double>(x_.size());
  }

private:
  std::vector<double> x_;
};

/// sup |F_n - F| for a continuous reference F.
inline double ks_statistic(const Ecdf& e, const std::function<double(double)>& ref) {
  const auto& x = e.sorted();
  const double n = static_cast<double>(x.size());
  double d = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double f = ref(x[i]);
    d = std::max({d, static_cast<double>(i + 1) / n - f, f - static_cast<double>(i) / n});
  }
  return d;
}

/// sup |F_n - G_m| between two empirical distribution functions.
inline double ks_statistic(const Ecdf& a, const Ecdf& b) {
  const auto& x = a.sorted();
  const auto& y = b.sorted();
  const double n = static_cast<double>(x.size()), m = static_cast<double>(y.size());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < x.size() && j < y.size()) {
    const double v = std::min(x[i], y[j]);
    while (i < x.size() && x[i] == v) ++i;
    while (j < y.size() && y[j] == v) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / n - static_cast<double>(j) / m));
  }
  return d;
}

struct SummaryStats {
  std::size_t n = 0;
  double mean = 0.0;
  double variance = 0.0;
  double skewness = 0.0;
  double mean_se = 0.0;
  double variance_se = 0.0;
  double skewness_se = 0.0;
};

namespace detail {

struct Moments {
  double mean, variance, skewness;
};

/// Unbiased variance and adjusted skewness from centred power sums.
inline Moments moments_from_sums(double n, double s1, double s2, double s3) {
  const double m = s1 / n;
  const double c2 = s2 / n - m * m;
  const double c3 = s3 / n - 3.0 * m * s2 / n + 2.0 * m * m * m;
  Moments out{m, n > 1 ? c2 * n / (n - 1.0) : 0.0, 0.0};
  if (n > 2 && c2 > 0.0) out.skewness = std::sqrt(n * (n - 1.0)) / (n - 2.0) * c3 / std::pow(c2, 1.5);
  return out;
}

} // namespace detail

/// Sample moments with leave-one-out jackknife standard errors.
inline SummaryStats summarize(const Ecdf& e) {
  const auto& x = e.sorted();
  const std::size_t n = x.size();
  detail::require(n >= 2, "summarize: at least two samples required");

  double shift = 0.0;
  for (double v : x) shift += v;
  shift /= static_cast<double>(n);

  double s1 = 0.0, s2 = 0.0, s3 = 0.0;
  for (double v : x) {
    const double d = v - shift;
    s1 += d;
    s2 += d * d;
    s3 += d * d * d;
  }
  const double nn = static_cast<double>(n);
  const auto full = detail::moments_from_sums(nn, s1, s2, s3);

  SummaryStats out;
  out.n = n;
  out.mean = full.mean + shift;
  out.variance = full.variance;
  out.skewness = full.skewness;

  if (n >= 3) {
    std::vector<detail::Moments> loo(n);
    detail::Moments avg{0, 0, 0};
    for (std::size_t i = 0; i < n; ++i) {
      const double d = x[i] - shift;
      loo[i] = detail::moments_from_sums(nn - 1.0, s1 - d, s2 - d * d, s3 - d * d * d);
      avg.mean += loo[i].mean / nn;
      avg.variance += loo[i].variance / nn;
      avg.skewness += loo[i].skewness / nn;
    }
    double vm = 0.0, vv = 0.0, vs = 0.0;
    for (const auto& l : loo) {
      vm += (l.mean - avg.mean) * (l.mean - avg.mean);
      vv += (l.variance - avg.variance) * (l.variance - avg.variance);
      vs += (l.skewness - avg.skewness) * (l.skewness - avg.skewness);
    }
    const double f = (nn - 1.0) / nn;
    out.mean_se = std::sqrt(f * vm);
    out.variance_se = std::sqrt(f * vv);
    out.skewness_se = std::sqrt(f * vs);
  }
  return out;
}

inline SummaryStats summarize(const std::vector<double>& sample) { return summarize(Ecdf(sample)); }

/// Least-squares slope and intercept of y on x.
struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
};

inline LinearFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
  detail::require(x.size() == y.size() && x.size() >= 2, "fit_line: need two or more points");
  const double n = static_cast<double>(x.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i] / n;
    my += y[i] / n;
  }
  double sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  detail::require(sxx > 0.0, "fit_line: x values are all equal");
  return {sxy / sxx, my - sxy / sxx * mx};
}

} // namespace fluctlab
