#pragma once

// Run configuration: a flat key = value text file with optional per-model
// sections, plus the FNV-1a hash stamped into output files for provenance.

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "mfqvar/csv.hpp"
#include "mfqvar/errors.hpp"
#include "mfqvar/forecast.hpp"
#include "mfqvar/simulate.hpp"
#include "mfqvar/timegrid.hpp"

namespace mfq {

struct RunConfig {
  // shared
  double tau = 0.05;
  int q = 1;
  bool q_auto = false;
  int q_max = 8;
  double alpha = 0.05;
  int k_lags = 12;
  std::size_t window = 1500;
  std::size_t stride = 10;
  Date oos_start{};
  bool has_oos_start = false;
  std::vector<std::string> models;
  std::uint64_t seed = 1;
  unsigned n_threads = 1;
  std::string daily_path;
  std::string monthly_path;
  std::string out_dir = ".";
  // backtest / mcs
  int dq_lags = 4;
  double mcs_delta = 0.10;
  int mcs_boot = 5000;
  int mcs_block = 10;
  // simulate
  int sim_reps = 500;
  std::vector<std::size_t> sim_n{2500};
  std::vector<double> sim_taus{0.05};
  int sim_qmax = 5;
  bool sim_lagtest = false;
  bool sim_certify = false;
  DgpConfig dgp;
  // per-model overrides, applied when a model is instantiated
  std::map<std::string, std::map<std::string, std::string>> model_options;
  std::string config_hash; // FNV-1a of the file bytes, hex

  ForecastOptions forecast_options(std::size_t oos_begin) const {
    ForecastOptions f;
    f.tau = tau;
    f.q = q;
    f.q_auto = q_auto;
    f.q_max = q_max;
    f.alpha = alpha;
    f.k_lags = k_lags;
    f.window = window;
    f.stride = stride;
    f.oos_begin = oos_begin;
    f.seed = seed;
    return f;
  }
};

namespace config_detail {

inline std::uint64_t fnv1a(const std::string& bytes) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

inline std::string trim(const std::string& s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

inline std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

inline double to_real(const std::string& v, const std::string& key) {
  try {
    std::size_t used = 0;
    const double x = std::stod(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return x;
  } catch (const std::exception&) {
    throw ConfigError("config: bad number for '" + key + "': " + v);
  }
}

inline long long to_int(const std::string& v, const std::string& key) {
  try {
    std::size_t used = 0;
    const long long x = std::stoll(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return x;
  } catch (const std::exception&) {
    throw ConfigError("config: bad integer for '" + key + "': " + v);
  }
}

inline bool to_bool(const std::string& v, const std::string& key) {
  if (v == "true" || v == "yes" || v == "1") return true;
  if (v == "false" || v == "no" || v == "0") return false;
  throw ConfigError("config: bad boolean for '" + key + "': " + v);
}

inline Date to_date(const std::string& v, const std::string& key) {
  try {
    return csv_detail::parse_date(v, key);
  } catch (const DataError& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
}

inline void apply_global(RunConfig& cfg, const std::string& key,
                         const std::string& value) {
  if (key == "tau") cfg.tau = to_real(value, key);
  else if (key == "q") {
    if (value == "auto") {
      cfg.q_auto = true;
    } else {
      cfg.q = static_cast<int>(to_int(value, key));
      cfg.q_auto = false;
    }
  } else if (key == "q_max") cfg.q_max = static_cast<int>(to_int(value, key));
  else if (key == "alpha") cfg.alpha = to_real(value, key);
  else if (key == "k_lags") cfg.k_lags = static_cast<int>(to_int(value, key));
  else if (key == "window") {
    const long long w = to_int(value, key);
    if (w < 0) throw ConfigError("config: window must be non-negative");
    cfg.window = static_cast<std::size_t>(w);
  } else if (key == "stride") {
    const long long s = to_int(value, key);
    if (s < 1) throw ConfigError("config: stride must be >= 1");
    cfg.stride = static_cast<std::size_t>(s);
  } else if (key == "oos_start") {
    cfg.oos_start = to_date(value, key);
    cfg.has_oos_start = true;
  } else if (key == "models") cfg.models = split_list(value);
  else if (key == "seed")
    cfg.seed = static_cast<std::uint64_t>(to_int(value, key));
  else if (key == "threads") {
    const long long t = to_int(value, key);
    if (t < 1) throw ConfigError("config: threads must be >= 1");
    cfg.n_threads = static_cast<unsigned>(t);
  } else if (key == "daily") cfg.daily_path = value;
  else if (key == "monthly") cfg.monthly_path = value;
  else if (key == "out") cfg.out_dir = value;
  else if (key == "dq_lags") cfg.dq_lags = static_cast<int>(to_int(value, key));
  else if (key == "mcs_delta") cfg.mcs_delta = to_real(value, key);
  else if (key == "mcs_boot") cfg.mcs_boot = static_cast<int>(to_int(value, key));
  else if (key == "mcs_block")
    cfg.mcs_block = static_cast<int>(to_int(value, key));
  else if (key == "sim_reps") cfg.sim_reps = static_cast<int>(to_int(value, key));
  else if (key == "sim_n") {
    cfg.sim_n.clear();
    for (const auto& item : split_list(value)) {
      const long long n = to_int(item, key);
      if (n < 1) throw ConfigError("config: sim_n entries must be >= 1");
      cfg.sim_n.push_back(static_cast<std::size_t>(n));
    }
  } else if (key == "sim_taus") {
    cfg.sim_taus.clear();
    for (const auto& item : split_list(value))
      cfg.sim_taus.push_back(to_real(item, key));
  } else if (key == "sim_qmax")
    cfg.sim_qmax = static_cast<int>(to_int(value, key));
  else if (key == "sim_lagtest") cfg.sim_lagtest = to_bool(value, key);
  else if (key == "sim_certify") cfg.sim_certify = to_bool(value, key);
  else if (key == "dgp_theta") cfg.dgp.theta = to_real(value, key);
  else if (key == "dgp_omega2") cfg.dgp.omega2 = to_real(value, key);
  else if (key == "dgp_k_lags")
    cfg.dgp.k_lags = static_cast<int>(to_int(value, key));
  else if (key == "dgp_phi") cfg.dgp.phi = to_real(value, key);
  else if (key == "dgp_betas") {
    cfg.dgp.betas.clear();
    for (const auto& item : split_list(value))
      cfg.dgp.betas.push_back(to_real(item, key));
  } else
    throw ConfigError("config: unknown key '" + key + "'");
}

}  // namespace config_detail

/// Parses the key = value format. '#' starts a comment, `[name]` opens a
/// per-model section whose keys override the shared settings for that model.
inline RunConfig parse_config_text(const std::string& text) {
  RunConfig cfg;
  cfg.config_hash = [&] {
    char buf[24];
    std::snprintf(buf, sizeof(buf), "%016llx",
                  static_cast<unsigned long long>(config_detail::fnv1a(text)));
    return std::string(buf);
  }();
  std::stringstream in(text);
  std::string line, section;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = config_detail::trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        throw ConfigError("config line " + std::to_string(line_no) +
                          ": unterminated section header");
      section = config_detail::trim(line.substr(1, line.size() - 2));
      if (section.empty())
        throw ConfigError("config line " + std::to_string(line_no) +
                          ": empty section name");
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config line " + std::to_string(line_no) +
                        ": expected key = value");
    const std::string key = config_detail::trim(line.substr(0, eq));
    const std::string value = config_detail::trim(line.substr(eq + 1));
    if (key.empty())
      throw ConfigError("config line " + std::to_string(line_no) +
                        ": empty key");
    if (section.empty())
      config_detail::apply_global(cfg, key, value);
    else
      cfg.model_options[section][key] = value;
  }
  if (!(cfg.tau > 0.0 && cfg.tau < 1.0))
    throw ConfigError("config: tau must lie in (0, 1)");
  for (double t : cfg.sim_taus)
    if (!(t > 0.0 && t < 1.0))
      throw ConfigError("config: sim_taus must lie in (0, 1)");
  for (const auto& [name, kv] : cfg.model_options) {
    const auto& known = model_names();
    if (std::find(known.begin(), known.end(), name) == known.end())
      throw ConfigError("config: section for unknown model '" + name + "'");
    for (const auto& [k, v] : kv) {
      (void)v;
      if (k != "q")
        throw ConfigError("config: unknown key '" + k + "' in [" + name + "]");
    }
  }
  return cfg;
}

inline RunConfig parse_config_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open config file: " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config_text(buf.str());
}

/// The forecast options for one configured model, with its section overrides.
inline ForecastOptions model_forecast_options(const RunConfig& cfg,
                                              const std::string& model,
                                              std::size_t oos_begin) {
  ForecastOptions f = cfg.forecast_options(oos_begin);
  const auto sec = cfg.model_options.find(model);
  if (sec != cfg.model_options.end()) {
    const auto q = sec->second.find("q");
    if (q != sec->second.end()) {
      if (q->second == "auto") {
        f.q_auto = true;
      } else {
        f.q = static_cast<int>(config_detail::to_int(q->second, model + ".q"));
        f.q_auto = false;
      }
    }
  }
  return f;
}

}  // namespace mfq
