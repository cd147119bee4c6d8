#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/distributions/normal.hpp>
#include <boost/math/distributions/students_t.hpp>

#include "mfqvar/errors.hpp"

namespace mfq {

inline double norm_pdf(double x) {
  static const boost::math::normal_distribution<double> d(0.0, 1.0);
  return boost::math::pdf(d, x);
}

inline double norm_cdf(double x) {
  static const boost::math::normal_distribution<double> d(0.0, 1.0);
  return boost::math::cdf(d, x);
}

inline double norm_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) throw ConfigError("norm_quantile: p must be in (0,1)");
  static const boost::math::normal_distribution<double> d(0.0, 1.0);
  return boost::math::quantile(d, p);
}

/// Upper tail probability P(X > x) for X ~ chi-square(df).
inline double chi2_sf(double x, double df) {
  if (x <= 0.0) return 1.0;
  boost::math::chi_squared_distribution<double> d(df);
  return boost::math::cdf(boost::math::complement(d, x));
}

inline double student_t_quantile(double p, double df) {
  if (!(p > 0.0 && p < 1.0)) throw ConfigError("student_t_quantile: p must be in (0,1)");
  boost::math::students_t_distribution<double> d(df);
  return boost::math::quantile(d, p);
}

inline double student_t_cdf(double x, double df) {
  boost::math::students_t_distribution<double> d(df);
  return boost::math::cdf(d, x);
}

/// E|Z| for Z standard normal, used as z_1 in the stationarity check.
inline double abs_moment_normal() { return std::sqrt(2.0 / 3.14159265358979323846); }

/// Type-7 empirical quantile (linear interpolation of order statistics) on an
/// already sorted vector.
inline double empirical_quantile_sorted(const std::vector<double>& sorted, double p) {
  if (sorted.empty()) throw DataError("empirical_quantile: empty sample");
  if (p <= 0.0) return sorted.front();
  if (p >= 1.0) return sorted.back();
  const double h = (static_cast<double>(sorted.size()) - 1.0) * p;
  const std::size_t lo = static_cast<std::size_t>(h);
  const double frac = h - static_cast<double>(lo);
  if (lo + 1 >= sorted.size()) return sorted.back();
  return sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]);
}

inline double empirical_quantile(std::vector<double> sample, double p) {
  std::sort(sample.begin(), sample.end());
  return empirical_quantile_sorted(sample, p);
}

inline double mean(const std::vector<double>& v) {
  if (v.empty()) throw DataError("mean: empty sample");
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

/// Sample standard deviation with the n-1 denominator.
inline double sample_sd(const std::vector<double>& v) {
  if (v.size() < 2) throw DataError("sample_sd: need at least two observations");
  const double m = mean(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return std::sqrt(s / static_cast<double>(v.size() - 1));
}

}  // namespace mfq
