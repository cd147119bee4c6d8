#pragma once

// Batch command implementations behind the command line tool. Every command
// takes a parsed RunConfig, writes CSV plus a text summary into out_dir, and
// returns the summary.

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "mfqvar/backtest.hpp"
#include "mfqvar/config.hpp"
#include "mfqvar/csv.hpp"
#include "mfqvar/errors.hpp"
#include "mfqvar/forecast.hpp"
#include "mfqvar/lag_test.hpp"
#include "mfqvar/mcs.hpp"
#include "mfqvar/simulate.hpp"
#include "mfqvar/stats.hpp"
#include "mfqvar/timegrid.hpp"

namespace mfq {

namespace cli_detail {

inline std::filesystem::path out_path(const RunConfig& cfg,
                                      const std::string& name) {
  std::filesystem::create_directories(cfg.out_dir);
  return std::filesystem::path(cfg.out_dir) / name;
}

inline void write_file(const std::filesystem::path& path,
                       const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  out << content;
  if (!out) throw DataError("write failed for " + path.string());
}

inline std::string provenance(const RunConfig& cfg) {
  return "# config " + cfg.config_hash + " seed " + std::to_string(cfg.seed) +
         "\n";
}

inline MixedFreqPanel load_panel(const RunConfig& cfg) {
  if (cfg.daily_path.empty())
    throw ConfigError("config: 'daily' data path is required");
  if (cfg.monthly_path.empty())
    throw ConfigError("config: 'monthly' data path is required");
  const auto daily = read_daily_csv(cfg.daily_path);
  const auto monthly = read_monthly_csv(cfg.monthly_path);
  return build_panel(daily, monthly, cfg.k_lags);
}

/// First out-of-sample row: the configured date, or the 80/20 split when no
/// date is given. A full window of history must precede it either way.
inline std::size_t resolve_oos_begin(const MixedFreqPanel& panel,
                                     const RunConfig& cfg) {
  std::size_t begin;
  if (cfg.has_oos_start) {
    const auto& d = panel.dates;
    std::size_t i = 0;
    while (i < d.size() && d[i] < cfg.oos_start) ++i;
    if (i == 0 || i == d.size())
      throw DataError("oos_start outside the usable data range");
    begin = i;
  } else {
    begin = panel.n_daily() - panel.n_daily() / 5;
  }
  return begin;
}

inline std::vector<std::string> require_models(const RunConfig& cfg) {
  if (cfg.models.empty())
    throw ConfigError("config: 'models' must list at least one model");
  return cfg.models;
}

inline std::string track_file_name(const std::string& model) {
  return "forecast_" + model + ".csv";
}

inline std::string format_track_csv(const RunConfig& cfg,
                                    const ModelForecast& fc) {
  std::string s = provenance(cfg);
  s += "# model " + fc.model + "\n";
  s += "date,ret,var,hit\n";
  for (const auto& r : fc.track.records) {
    s += r.date.to_string();
    s += ',';
    s += format_real(r.ret);
    s += ',';
    s += format_real(r.var);
    s += ',';
    s += r.hit ? '1' : '0';
    s += '\n';
  }
  return s;
}

inline VarTrack read_track_csv(const std::string& path, double tau) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open track file: " + path);
  std::vector<Date> dates;
  std::vector<double> rets, vars;
  std::string line;
  std::size_t line_no = 0;
  bool header_seen = false;
  while (std::getline(in, line)) {
    ++line_no;
    line = csv_detail::strip_cr(line);
    if (line.empty() || line[0] == '#') continue;
    const std::string ctx = path + ":" + std::to_string(line_no);
    auto tok = csv_detail::split(line);
    if (!header_seen) {
      if (!(tok.size() == 4 && tok[0] == "date" && tok[1] == "ret" &&
            tok[2] == "var" && tok[3] == "hit"))
        throw DataError(ctx + ": expected header 'date,ret,var,hit'");
      header_seen = true;
      continue;
    }
    if (tok.size() != 4) throw DataError(ctx + ": wrong field count");
    dates.push_back(csv_detail::parse_date(tok[0], ctx));
    rets.push_back(csv_detail::parse_real(tok[1], ctx));
    vars.push_back(csv_detail::parse_real(tok[2], ctx));
    const bool hit = rets.back() < vars.back();
    if (tok[3] != (hit ? "1" : "0"))
      throw DataError(ctx + ": hit flag disagrees with ret and var");
  }
  if (!header_seen) throw DataError(path + ": missing header row");
  if (dates.empty()) throw DataError(path + ": no data rows");
  return make_track(dates, rets, vars, tau);
}

inline std::vector<VarTrack> load_tracks(const RunConfig& cfg,
                                         const std::vector<std::string>& models) {
  std::vector<VarTrack> tracks;
  tracks.reserve(models.size());
  for (const auto& m : models)
    tracks.push_back(read_track_csv(
        (std::filesystem::path(cfg.out_dir) / track_file_name(m)).string(),
        cfg.tau));
  for (std::size_t j = 1; j < tracks.size(); ++j) {
    const auto& a = tracks[0].records;
    const auto& b = tracks[j].records;
    bool aligned = a.size() == b.size();
    for (std::size_t i = 0; aligned && i < a.size(); ++i)
      aligned = !(a[i].date < b[i].date) && !(b[i].date < a[i].date);
    if (!aligned)
      throw DataError("track files for " + models[0] + " and " + models[j] +
                      " cover different days");
  }
  return tracks;
}

inline std::string format_pct(double x) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", x);
  return std::string(buf);
}

}  // namespace cli_detail

/// Sequential lag-order test on the full panel.
inline std::string cmd_lagtest(const RunConfig& cfg) {
  if (cfg.q_max < 1) throw ConfigError("lagtest: q_max must be >= 1");
  const auto panel = cli_detail::load_panel(cfg);
  MfqSpec spec;
  spec.k_lags = cfg.k_lags;
  spec.use_midas = true;
  spec.use_x = panel.has_x;
  spec.omega2_grid = default_omega2_grid();
  const auto sel =
      sequential_lag_test(panel, spec, cfg.tau, cfg.q_max, cfg.alpha);

  std::string csv = cli_detail::provenance(cfg);
  csv += "q_restricted,q_unrestricted,stat,p_value,rejected\n";
  for (const auto& st : sel.steps) {
    csv += std::to_string(st.q_restricted) + ',' +
           std::to_string(st.q_unrestricted) + ',' +
           format_real(st.test.statistic) + ',' +
           format_real(st.test.p_value) + ',' + (st.rejected ? '1' : '0');
    csv += '\n';
  }
  cli_detail::write_file(cli_detail::out_path(cfg, "lagtest.csv"), csv);

  std::ostringstream txt;
  txt << "sequential lag test  tau=" << format_real(cfg.tau)
      << "  alpha=" << format_real(cfg.alpha) << "  n=" << sel.n_obs << "\n";
  for (const auto& st : sel.steps)
    txt << "  q " << st.q_restricted << " -> " << st.q_unrestricted
        << "  stat " << format_real(st.test.statistic) << "  p "
        << format_real(st.test.p_value)
        << (st.rejected ? "  reject" : "  keep") << "\n";
  txt << "selected q = " << sel.selected_q << "\n";
  cli_detail::write_file(cli_detail::out_path(cfg, "lagtest.txt"), txt.str());
  return txt.str();
}

/// Rolling forecasts for every configured model, one CSV per model.
inline std::string cmd_forecast(const RunConfig& cfg) {
  const auto models = cli_detail::require_models(cfg);
  const auto panel = cli_detail::load_panel(cfg);
  const std::size_t oos_begin = cli_detail::resolve_oos_begin(panel, cfg);

  std::vector<ModelForecast> results(models.size());
  for (std::size_t i = 0; i < models.size(); ++i)
    (void)forecast_detail::make_forecaster(
        models[i], model_forecast_options(cfg, models[i], oos_begin));
  parallel_for(models.size(), cfg.n_threads, [&](std::size_t i) {
    results[i] = run_forecast_model(
        panel, models[i], model_forecast_options(cfg, models[i], oos_begin));
  });

  std::ostringstream txt;
  txt << "forecast  oos days=" << panel.n_daily() - oos_begin
      << "  window=" << cfg.window << "  stride=" << cfg.stride
      << "  tau=" << format_real(cfg.tau) << "\n";
  for (const auto& fc : results) {
    cli_detail::write_file(
        cli_detail::out_path(cfg, cli_detail::track_file_name(fc.model)),
        cli_detail::format_track_csv(cfg, fc));
    txt << "  " << fc.model << "  refits " << fc.n_refits << "  carried "
        << fc.n_carried;
    if (fc.model == "mfqarchx" || fc.model == "mfqarch" || fc.model == "qarch")
      txt << "  q " << fc.q_used;
    txt << "\n";
  }
  cli_detail::write_file(cli_detail::out_path(cfg, "forecast.txt"), txt.str());
  return txt.str();
}

/// Backtest table over the stored forecast tracks.
inline std::string cmd_backtest(const RunConfig& cfg) {
  const auto models = cli_detail::require_models(cfg);
  const auto tracks = cli_detail::load_tracks(cfg, models);

  std::string csv = cli_detail::provenance(cfg);
  csv += "model,lf_var,mean_var,sd_var,ae,uc_p,cc_p,dq_p\n";
  std::ostringstream txt;
  txt << "backtest  tau=" << format_real(cfg.tau)
      << "  n=" << tracks.front().records.size() << "\n";
  for (std::size_t j = 0; j < models.size(); ++j) {
    const auto& t = tracks[j];
    const auto rep = backtest_report(t, cfg.dq_lags);
    const auto losses = quantile_loss_series(t);
    std::vector<double> vars;
    vars.reserve(t.records.size());
    for (const auto& r : t.records) vars.push_back(r.var);
    const double lf = mean(losses);
    const double mv = mean(vars);
    const double sv = sample_sd(vars);
    csv += models[j] + ',' + format_real(lf) + ',' + format_real(mv) + ',' +
           format_real(sv) + ',' + format_real(rep.ae) + ',' +
           format_real(rep.uc_p) + ',' + format_real(rep.cc_p) + ',' +
           format_real(rep.dq_p) + '\n';
    const bool pass =
        rep.uc_p >= 0.05 && rep.cc_p >= 0.05 && rep.dq_p >= 0.05;
    txt << "  " << models[j] << "  ae " << cli_detail::format_pct(rep.ae)
        << "  uc " << cli_detail::format_pct(rep.uc_p) << "  cc "
        << cli_detail::format_pct(rep.cc_p) << "  dq "
        << cli_detail::format_pct(rep.dq_p) << "  "
        << (pass ? "pass" : "fail") << "\n";
  }
  cli_detail::write_file(cli_detail::out_path(cfg, "backtest.csv"), csv);
  cli_detail::write_file(cli_detail::out_path(cfg, "backtest.txt"), txt.str());
  return txt.str();
}

/// Model confidence set over the stored forecast tracks.
inline std::string cmd_mcs(const RunConfig& cfg) {
  const auto models = cli_detail::require_models(cfg);
  if (models.size() < 2)
    throw ConfigError("mcs: need at least two configured models");
  const auto tracks = cli_detail::load_tracks(cfg, models);

  LossPanel panel;
  panel.models = models;
  panel.tau = cfg.tau;
  panel.losses.resize(
      static_cast<Eigen::Index>(tracks.front().records.size()),
      static_cast<Eigen::Index>(models.size()));
  for (std::size_t j = 0; j < tracks.size(); ++j) {
    const auto l = quantile_loss_series(tracks[j]);
    for (std::size_t i = 0; i < l.size(); ++i)
      panel.losses(static_cast<Eigen::Index>(i),
                   static_cast<Eigen::Index>(j)) = l[i];
  }
  const auto rep =
      run_mcs(panel, cfg.mcs_delta, cfg.mcs_boot, cfg.mcs_block, cfg.seed);

  std::map<std::string, double> mean_by_name;
  for (std::size_t j = 0; j < rep.models.size(); ++j)
    mean_by_name[rep.models[j]] = rep.mean_loss[j];
  auto in_set = [&](double level, const std::string& name) {
    const auto& s = rep.survivors.at(level);
    return std::find(s.begin(), s.end(), name) != s.end();
  };

  // statistic: semi-quadratic over unordered model pairs
  std::string csv = cli_detail::provenance(cfg);
  csv += "# t_sq over unordered model pairs, circular block bootstrap (b=" +
         std::to_string(cfg.mcs_boot) +
         ", block=" + std::to_string(cfg.mcs_block) + ")\n";
  csv += "order,model,mean_loss,p_value,in_75,in_90\n";
  int order = 1;
  for (const auto& [name, p] : rep.elimination_order) {
    csv += std::to_string(order++) + ',' + name + ',' +
           format_real(mean_by_name.at(name)) + ',' + format_real(p) + ',' +
           (in_set(0.75, name) ? '1' : '0');
    csv += ',';
    csv += in_set(0.90, name) ? '1' : '0';
    csv += '\n';
  }
  cli_detail::write_file(cli_detail::out_path(cfg, "mcs.csv"), csv);

  std::ostringstream txt;
  txt << "model confidence set  tau=" << format_real(cfg.tau)
      << "  delta=" << format_real(cfg.mcs_delta) << "\n";
  for (const auto& [level, names] : rep.survivors) {
    txt << "  survivors at " << format_real(level) << ":";
    for (const auto& n : names) txt << ' ' << n;
    txt << "\n";
  }
  cli_detail::write_file(cli_detail::out_path(cfg, "mcs.txt"), txt.str());
  return txt.str();
}

/// Monte Carlo study tables for the configured sample sizes and levels.
inline std::string cmd_simulate(const RunConfig& cfg) {
  std::ostringstream txt;
  txt << "simulate  reps=" << cfg.sim_reps << "\n";
  for (std::size_t i = 0; i < cfg.sim_n.size(); ++i) {
    DgpConfig dgp = cfg.dgp;
    dgp.n_daily = cfg.sim_n[i];
    dgp.seed = cfg.seed + i;
    McOptions opt;
    opt.do_lagtest = cfg.sim_lagtest;
    opt.certify = cfg.sim_certify;
    opt.alpha = cfg.alpha;
    opt.n_threads = static_cast<int>(cfg.n_threads);
    const auto tables =
        run_mc_study(dgp, cfg.sim_reps, cfg.sim_taus, cfg.sim_qmax, opt);
    for (const auto& tab : tables) {
      const std::string stem = "n" + std::to_string(tab.n_daily) + "_tau" +
                               format_real(tab.tau);
      std::string csv = cli_detail::provenance(cfg);
      csv += "name,truth,mean,bias,mse\n";
      for (std::size_t c = 0; c < tab.names.size(); ++c) {
        const auto ci = static_cast<Eigen::Index>(c);
        csv += tab.names[c] + ',' + format_real(tab.truth[c]) + ',' +
               format_real(tab.mean(ci)) + ',' +
               format_real(tab.mean(ci) - tab.truth[c]) + ',' +
               format_real(tab.mse(ci)) + '\n';
      }
      cli_detail::write_file(
          cli_detail::out_path(cfg, "mc_coeff_" + stem + ".csv"), csv);
      if (!tab.nonrejection_pct.empty()) {
        std::string lt = cli_detail::provenance(cfg);
        lt += "lag,nonrejection_pct\n";
        for (std::size_t l = 0; l < tab.nonrejection_pct.size(); ++l)
          lt += std::to_string(l + 1) + ',' +
                format_real(tab.nonrejection_pct[l]) + '\n';
        cli_detail::write_file(
            cli_detail::out_path(cfg, "mc_lagtest_" + stem + ".csv"), lt);
      }
      txt << "  " << stem << "  replicates "
          << tab.estimates.rows() << "/" << tab.r_reps << "  failed "
          << tab.n_failed << "\n";
    }
  }
  cli_detail::write_file(cli_detail::out_path(cfg, "simulate.txt"), txt.str());
  return txt.str();
}

}  // namespace mfq
