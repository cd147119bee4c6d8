#pragma once

// VaR validation: hit tracks, actual-over-expected ratio, unconditional and
// conditional coverage tests, and the dynamic quantile regression test.

#include <cmath>
#include <cstddef>
#include <vector>

#include <Eigen/Dense>

#include "mfqvar/errors.hpp"
#include "mfqvar/stats.hpp"
#include "mfqvar/timegrid.hpp"

namespace mfq {

struct VarRecord {
  Date date;
  double ret = 0.0;
  double var = 0.0;
  bool hit = false;  // ret < var
};

struct VarTrack {
  std::vector<VarRecord> records;
  double tau = 0.0;
};

inline VarTrack make_track(const std::vector<Date>& dates,
                           const std::vector<double>& rets,
                           const std::vector<double>& vars, double tau) {
  if (!(tau > 0.0 && tau < 1.0))
    throw ConfigError("make_track: tau must lie in (0, 1)");
  if (dates.size() != rets.size() || rets.size() != vars.size())
    throw DataError("make_track: length mismatch");
  VarTrack t;
  t.tau = tau;
  t.records.reserve(rets.size());
  for (std::size_t i = 0; i < rets.size(); ++i) {
    if (!std::isfinite(rets[i]) || !std::isfinite(vars[i]))
      throw DataError("make_track: non-finite entry");
    t.records.push_back(VarRecord{dates[i], rets[i], vars[i],
                                  rets[i] < vars[i]});
  }
  return t;
}

struct TestStat {
  double stat = 0.0;
  double p_value = 1.0;
  int df = 0;
};

struct BacktestReport {
  std::size_t n = 0;
  std::size_t n_hits = 0;
  double ae = 0.0;
  double uc_stat = 0.0, uc_p = 1.0;
  double cc_stat = 0.0, cc_p = 1.0;
  double dq_stat = 0.0, dq_p = 1.0;
  int dq_df = 0;
};

namespace bt_detail {

inline double xlogy(double x, double y) {
  return x == 0.0 ? 0.0 : x * std::log(y);
}

inline std::size_t count_hits(const VarTrack& t) {
  std::size_t h = 0;
  for (const auto& r : t.records) h += r.hit ? 1 : 0;
  return h;
}

}  // namespace bt_detail

inline double ae_ratio(const VarTrack& track) {
  if (track.records.empty()) throw DataError("ae_ratio: empty track");
  return static_cast<double>(bt_detail::count_hits(track)) /
         (track.tau * static_cast<double>(track.records.size()));
}

/// Kupiec's unconditional-coverage likelihood ratio against chi-square(1).
inline TestStat kupiec_uc(const VarTrack& track) {
  if (track.records.empty()) throw DataError("kupiec_uc: empty track");
  const double n = static_cast<double>(track.records.size());
  const double h = static_cast<double>(bt_detail::count_hits(track));
  const double tau = track.tau;
  const double pi = h / n;
  using bt_detail::xlogy;
  const double ll_null = xlogy(h, tau) + xlogy(n - h, 1.0 - tau);
  const double ll_alt = xlogy(h, pi) + xlogy(n - h, 1.0 - pi);
  TestStat s;
  s.stat = std::max(0.0, -2.0 * (ll_null - ll_alt));
  s.df = 1;
  s.p_value = chi2_sf(s.stat, 1);
  return s;
}

/// Christoffersen's conditional coverage: UC plus first-order independence,
/// against chi-square(2).
inline TestStat christoffersen_cc(const VarTrack& track) {
  if (track.records.size() < 2)
    throw DataError("christoffersen_cc: need at least 2 observations");
  double n00 = 0, n01 = 0, n10 = 0, n11 = 0;
  for (std::size_t t = 1; t < track.records.size(); ++t) {
    const bool prev = track.records[t - 1].hit, cur = track.records[t].hit;
    if (!prev && !cur) ++n00;
    if (!prev && cur) ++n01;
    if (prev && !cur) ++n10;
    if (prev && cur) ++n11;
  }
  using bt_detail::xlogy;
  const double m = n00 + n01 + n10 + n11;
  const double pi = (n01 + n11) / m;
  const double pi0 = n00 + n01 > 0 ? n01 / (n00 + n01) : 0.0;
  const double pi1 = n10 + n11 > 0 ? n11 / (n10 + n11) : 0.0;
  const double ll_null = xlogy(n01 + n11, pi) + xlogy(n00 + n10, 1.0 - pi);
  const double ll_alt = xlogy(n01, pi0) + xlogy(n00, 1.0 - pi0) +
                        xlogy(n11, pi1) + xlogy(n10, 1.0 - pi1);
  const double lr_ind = std::max(0.0, -2.0 * (ll_null - ll_alt));
  TestStat s;
  s.stat = kupiec_uc(track).stat + lr_ind;
  s.df = 2;
  s.p_value = chi2_sf(s.stat, 2);
  return s;
}

/// Dynamic quantile test: the demeaned hit series regressed on a constant,
/// its own lags, and the contemporaneous VaR forecast.
inline TestStat dq_test(const VarTrack& track, int n_lags = 4) {
  if (n_lags < 1) throw ConfigError("dq_test: n_lags must be >= 1");
  const std::size_t n = track.records.size();
  if (n <= static_cast<std::size_t>(n_lags) + 2)
    throw DataError("dq_test: track too short for the requested lags");
  const double tau = track.tau;
  const std::size_t rows = n - static_cast<std::size_t>(n_lags);
  const std::size_t cols = static_cast<std::size_t>(n_lags) + 2;
  Eigen::MatrixXd x(rows, cols);
  Eigen::VectorXd y(rows);
  for (std::size_t t = 0; t < rows; ++t) {
    const std::size_t i = t + static_cast<std::size_t>(n_lags);
    y(static_cast<Eigen::Index>(t)) = (track.records[i].hit ? 1.0 : 0.0) - tau;
    x(static_cast<Eigen::Index>(t), 0) = 1.0;
    for (int j = 1; j <= n_lags; ++j)
      x(static_cast<Eigen::Index>(t), j) =
          (track.records[i - static_cast<std::size_t>(j)].hit ? 1.0 : 0.0) -
          tau;
    x(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(cols) - 1) =
        track.records[i].var;
  }
  const Eigen::MatrixXd xtx = x.transpose() * x;
  const Eigen::VectorXd xty = x.transpose() * y;
  Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(xtx);
  TestStat s;
  s.df = static_cast<int>(cod.rank());
  s.stat = std::max(0.0, xty.dot(cod.solve(xty)) / (tau * (1.0 - tau)));
  s.p_value = chi2_sf(s.stat, s.df);
  return s;
}

inline BacktestReport backtest_report(const VarTrack& track, int n_lags = 4) {
  BacktestReport r;
  r.n = track.records.size();
  r.n_hits = bt_detail::count_hits(track);
  r.ae = ae_ratio(track);
  const auto uc = kupiec_uc(track);
  r.uc_stat = uc.stat;
  r.uc_p = uc.p_value;
  const auto cc = christoffersen_cc(track);
  r.cc_stat = cc.stat;
  r.cc_p = cc.p_value;
  const auto dq = dq_test(track, n_lags);
  r.dq_stat = dq.stat;
  r.dq_p = dq.p_value;
  r.dq_df = dq.df;
  return r;
}

}  // namespace mfq
