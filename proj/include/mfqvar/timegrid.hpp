#pragma once

#include <cmath>
#include <compare>
#include <cstddef>
#include <cstdio>
#include <optional>
#include <string>
#include <vector>

#include "mfqvar/errors.hpp"

namespace mfq {

/// Calendar date, ISO-8601 text form YYYY-MM-DD. Only ordering and month
/// bucketing are needed; no day arithmetic.
struct Date {
  int year = 0;
  int month = 0;  // 1..12
  int day = 0;    // 1..31

  auto operator<=>(const Date&) const = default;

  std::string to_string() const {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%04d-%02d-%02d", year, month, day);
    return std::string(buf);
  }
};

/// Months since year 0, a gap-free integer key for year-month pairs.
using MonthKey = int;

inline MonthKey month_key(int year, int month) { return year * 12 + (month - 1); }
inline MonthKey month_key(const Date& d) { return month_key(d.year, d.month); }

inline std::string month_key_to_string(MonthKey k) {
  char buf[24];
  const int y = k / 12, m = k % 12 + 1;
  std::snprintf(buf, sizeof(buf), "%04d-%02d", y, m);
  return std::string(buf);
}

struct DailyObs {
  Date date;
  double ret = 0.0;              // log-return, percent
  std::optional<double> x;       // realized volatility, percent, >= 0
};

struct MonthlyObs {
  MonthKey month = 0;
  double value = 0.0;
};

/// Aligned daily/monthly panel. Daily rows live on a flat index; month_of maps
/// every daily row to the position its month would occupy in the monthly
/// series (may equal n_monthly() for trailing days past the last monthly
/// entry, since MV lags only look backward). Immutable after build.
struct MixedFreqPanel {
  std::vector<Date> dates;
  std::vector<double> ret;
  std::vector<double> x;          // empty when has_x == false
  bool has_x = false;
  std::vector<int> month_of;      // per daily row
  std::vector<MonthKey> months;   // contiguous monthly keys
  std::vector<double> mv;         // monthly values, same length as months
  int k_lags = 0;
  std::size_t trimmed_prefix = 0;  // daily rows dropped for lack of monthly lags

  std::size_t n_daily() const { return ret.size(); }
  std::size_t n_monthly() const { return mv.size(); }
};

/// Aligns the two frequencies and trims the daily prefix so that every
/// retained row's month has at least k_lags prior monthly observations.
inline MixedFreqPanel build_panel(const std::vector<DailyObs>& daily,
                                  const std::vector<MonthlyObs>& monthly,
                                  int k_lags) {
  if (k_lags < 1) throw ConfigError("build_panel: k_lags must be >= 1");
  if (daily.empty()) throw DataError("build_panel: empty daily series");
  if (monthly.empty()) throw DataError("build_panel: empty monthly series");

  for (std::size_t i = 1; i < daily.size(); ++i) {
    if (!(daily[i - 1].date < daily[i].date))
      throw AlignmentError("build_panel: daily dates not strictly increasing at " +
                           daily[i].date.to_string());
  }
  for (std::size_t t = 1; t < monthly.size(); ++t) {
    const MonthKey prev = monthly[t - 1].month, cur = monthly[t].month;
    if (cur == prev + 1) continue;
    if (cur <= prev)
      throw AlignmentError("build_panel: monthly keys not strictly increasing at " +
                           month_key_to_string(cur));
    throw AlignmentError("build_panel: gap in monthly series before " +
                         month_key_to_string(cur));
  }
  for (const DailyObs& d : daily) {
    if (!std::isfinite(d.ret))
      throw DataError("build_panel: non-finite return at " + d.date.to_string());
    if (d.x && (!std::isfinite(*d.x) || *d.x < 0.0))
      throw DataError("build_panel: invalid x at " + d.date.to_string());
  }
  for (const MonthlyObs& m : monthly) {
    if (!std::isfinite(m.value))
      throw DataError("build_panel: non-finite monthly value at " +
                      month_key_to_string(m.month));
  }
  const bool has_x = daily.front().x.has_value();
  for (const DailyObs& d : daily) {
    if (d.x.has_value() != has_x)
      throw DataError("build_panel: x column present on some daily rows only");
  }

  const MonthKey first_month = monthly.front().month;
  const int n_months = static_cast<int>(monthly.size());

  // A row's month position relative to the monthly series; one month past the
  // end is fine (backward-looking lags), anything further is a coverage gap.
  std::size_t first_usable = daily.size();
  for (std::size_t i = 0; i < daily.size(); ++i) {
    const int pos = month_key(daily[i].date) - first_month;
    if (pos > n_months)
      throw CoverageError("build_panel: daily month " +
                          month_key_to_string(month_key(daily[i].date)) +
                          " not covered by the monthly span");
    if (pos >= k_lags) {
      first_usable = i;
      break;
    }
  }
  if (first_usable == daily.size())
    throw CoverageError(
        "build_panel: no daily observation has the required " +
        std::to_string(k_lags) + " prior months of monthly history");

  MixedFreqPanel p;
  p.has_x = has_x;
  p.k_lags = k_lags;
  p.trimmed_prefix = first_usable;
  const std::size_t n = daily.size() - first_usable;
  p.dates.reserve(n);
  p.ret.reserve(n);
  p.month_of.reserve(n);
  if (has_x) p.x.reserve(n);
  for (std::size_t i = first_usable; i < daily.size(); ++i) {
    p.dates.push_back(daily[i].date);
    p.ret.push_back(daily[i].ret);
    p.month_of.push_back(month_key(daily[i].date) - first_month);
    if (has_x) p.x.push_back(*daily[i].x);
  }
  p.months.reserve(monthly.size());
  p.mv.reserve(monthly.size());
  for (const MonthlyObs& m : monthly) {
    p.months.push_back(m.month);
    p.mv.push_back(m.value);
  }
  return p;
}

/// The q previous absolute returns before `pos` on the flat daily index, most
/// recent first. Month boundaries are crossed freely; `pos` may equal
/// n_daily() so next-day lags can be formed at the end of the sample.
inline std::vector<double> lagged_returns(const MixedFreqPanel& panel,
                                          std::size_t pos, int q) {
  if (q < 0) throw ConfigError("lagged_returns: q must be >= 0");
  if (pos > panel.n_daily())
    throw InsufficientHistoryError("lagged_returns: position out of range");
  if (pos < static_cast<std::size_t>(q))
    throw InsufficientHistoryError("lagged_returns: fewer than q observations before position");
  std::vector<double> out(static_cast<std::size_t>(q));
  for (int j = 1; j <= q; ++j)
    out[static_cast<std::size_t>(j - 1)] = std::abs(panel.ret[pos - static_cast<std::size_t>(j)]);
  return out;
}

}  // namespace mfq
