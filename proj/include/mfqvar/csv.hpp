#pragma once

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "mfqvar/errors.hpp"
#include "mfqvar/timegrid.hpp"

namespace mfq {

namespace csv_detail {

inline std::vector<std::string_view> split(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= line.size(); ++i) {
    if (i == line.size() || line[i] == ',') {
      out.push_back(line.substr(start, i - start));
      start = i + 1;
    }
  }
  return out;
}

inline double parse_real(std::string_view tok, const std::string& ctx) {
  double v = 0.0;
  const char* first = tok.data();
  const char* last = tok.data() + tok.size();
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc{} || ptr != last)
    throw DataError(ctx + ": cannot parse number '" + std::string(tok) + "'");
  return v;
}

inline int parse_int_field(std::string_view tok, const std::string& ctx) {
  int v = 0;
  auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc{} || ptr != tok.data() + tok.size())
    throw DataError(ctx + ": cannot parse integer '" + std::string(tok) + "'");
  return v;
}

inline Date parse_date(std::string_view tok, const std::string& ctx) {
  if (tok.size() != 10 || tok[4] != '-' || tok[7] != '-')
    throw DataError(ctx + ": expected ISO date YYYY-MM-DD, got '" + std::string(tok) + "'");
  Date d;
  d.year = parse_int_field(tok.substr(0, 4), ctx);
  d.month = parse_int_field(tok.substr(5, 2), ctx);
  d.day = parse_int_field(tok.substr(8, 2), ctx);
  if (d.month < 1 || d.month > 12 || d.day < 1 || d.day > 31)
    throw DataError(ctx + ": date out of range '" + std::string(tok) + "'");
  return d;
}

inline MonthKey parse_month(std::string_view tok, const std::string& ctx) {
  if (tok.size() != 7 || tok[4] != '-')
    throw DataError(ctx + ": expected month YYYY-MM, got '" + std::string(tok) + "'");
  const int y = parse_int_field(tok.substr(0, 4), ctx);
  const int m = parse_int_field(tok.substr(5, 2), ctx);
  if (m < 1 || m > 12) throw DataError(ctx + ": month out of range '" + std::string(tok) + "'");
  return month_key(y, m);
}

inline std::string strip_cr(std::string line) {
  if (!line.empty() && line.back() == '\r') line.pop_back();
  return line;
}

}  // namespace csv_detail

/// Reads a daily series CSV with header `date,ret` or `date,ret,x`.
/// Lines starting with '#' are comments.
inline std::vector<DailyObs> read_daily_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open daily CSV: " + path);
  std::string line;
  std::size_t line_no = 0;
  bool header_seen = false;
  bool expect_x = false;
  std::vector<DailyObs> out;
  while (std::getline(in, line)) {
    ++line_no;
    line = csv_detail::strip_cr(line);
    if (line.empty() || line[0] == '#') continue;
    const std::string ctx = path + ":" + std::to_string(line_no);
    auto tok = csv_detail::split(line);
    if (!header_seen) {
      if (tok.size() == 2 && tok[0] == "date" && tok[1] == "ret") {
        expect_x = false;
      } else if (tok.size() == 3 && tok[0] == "date" && tok[1] == "ret" && tok[2] == "x") {
        expect_x = true;
      } else {
        throw DataError(ctx + ": expected header 'date,ret' or 'date,ret,x'");
      }
      header_seen = true;
      continue;
    }
    if (tok.size() != (expect_x ? 3u : 2u))
      throw DataError(ctx + ": wrong field count");
    DailyObs d;
    d.date = csv_detail::parse_date(tok[0], ctx);
    d.ret = csv_detail::parse_real(tok[1], ctx);
    if (expect_x) d.x = csv_detail::parse_real(tok[2], ctx);
    out.push_back(d);
  }
  if (!header_seen) throw DataError(path + ": missing header row");
  if (out.empty()) throw DataError(path + ": no data rows");
  return out;
}

/// Reads a monthly series CSV with header `month,value` (months as YYYY-MM).
inline std::vector<MonthlyObs> read_monthly_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open monthly CSV: " + path);
  std::string line;
  std::size_t line_no = 0;
  bool header_seen = false;
  std::vector<MonthlyObs> out;
  while (std::getline(in, line)) {
    ++line_no;
    line = csv_detail::strip_cr(line);
    if (line.empty() || line[0] == '#') continue;
    const std::string ctx = path + ":" + std::to_string(line_no);
    auto tok = csv_detail::split(line);
    if (!header_seen) {
      if (!(tok.size() == 2 && tok[0] == "month" && tok[1] == "value"))
        throw DataError(ctx + ": expected header 'month,value'");
      header_seen = true;
      continue;
    }
    if (tok.size() != 2) throw DataError(ctx + ": wrong field count");
    MonthlyObs m;
    m.month = csv_detail::parse_month(tok[0], ctx);
    m.value = csv_detail::parse_real(tok[1], ctx);
    out.push_back(m);
  }
  if (!header_seen) throw DataError(path + ": missing header row");
  if (out.empty()) throw DataError(path + ": no data rows");
  return out;
}

inline std::string format_real(double v) {
  if (std::isnan(v)) return "na";
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.10g", v);
  return std::string(buf);
}

}  // namespace mfq
