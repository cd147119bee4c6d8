#pragma once

// Rolling out-of-sample VaR forecasting: refit each model on a trailing
// window every `stride` days, predict one step ahead in between. Parameters
// used on day d are estimated from data strictly before d.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "mfqvar/backtest.hpp"
#include "mfqvar/caviar.hpp"
#include "mfqvar/errors.hpp"
#include "mfqvar/garch.hpp"
#include "mfqvar/garch_midas.hpp"
#include "mfqvar/lag_test.hpp"
#include "mfqvar/mfqarch.hpp"
#include "mfqvar/parallel.hpp"
#include "mfqvar/stats.hpp"
#include "mfqvar/timegrid.hpp"

namespace mfq {

/// Every selectable model, in reporting order.
inline const std::vector<std::string>& model_names() {
  static const std::vector<std::string> names{
      "mfqarchx", "mfqarch", "qarch",       "sav",
      "as",       "ig",      "garch",       "garch_t",
      "gjr",      "gjr_t",   "riskmetrics", "garch_midas"};
  return names;
}

struct ForecastOptions {
  double tau = 0.05;
  int q = 1;           // quantile-ARCH lag order
  bool q_auto = false; // pick q by the sequential test on the first window
  int q_max = 8;
  double alpha = 0.05; // level of the sequential test
  int k_lags = 12;
  std::size_t window = 1500;
  std::size_t stride = 10;
  std::size_t oos_begin = 0; // panel row of the first out-of-sample day
  std::uint64_t seed = 1;
};

struct ModelForecast {
  std::string model;
  VarTrack track;
  std::size_t n_refits = 0;
  std::size_t n_carried = 0; // failed refits that kept the previous parameters
  int q_used = 0;            // lag order actually run (quantile-ARCH family)
};

namespace forecast_detail {

/// Daily rows [lo, hi) with the monthly series kept whole, so month positions
/// stay valid and MIDAS terms see exactly the history they would in full data.
inline MixedFreqPanel slice_panel(const MixedFreqPanel& panel, std::size_t lo,
                                  std::size_t hi) {
  MixedFreqPanel s;
  s.dates.assign(panel.dates.begin() + static_cast<std::ptrdiff_t>(lo),
                 panel.dates.begin() + static_cast<std::ptrdiff_t>(hi));
  s.ret.assign(panel.ret.begin() + static_cast<std::ptrdiff_t>(lo),
               panel.ret.begin() + static_cast<std::ptrdiff_t>(hi));
  if (panel.has_x)
    s.x.assign(panel.x.begin() + static_cast<std::ptrdiff_t>(lo),
               panel.x.begin() + static_cast<std::ptrdiff_t>(hi));
  s.has_x = panel.has_x;
  s.month_of.assign(panel.month_of.begin() + static_cast<std::ptrdiff_t>(lo),
                    panel.month_of.begin() + static_cast<std::ptrdiff_t>(hi));
  s.months = panel.months;
  s.mv = panel.mv;
  s.k_lags = panel.k_lags;
  s.trimmed_prefix = panel.trimmed_prefix + lo;
  return s;
}

class Forecaster {
 public:
  virtual ~Forecaster() = default;
  /// Estimates on daily rows [w0, w1); throws on failure and must leave the
  /// previous parameters intact when it does.
  virtual void fit(const MixedFreqPanel& panel, std::size_t w0,
                   std::size_t w1) = 0;
  /// VaR for row `pos` from the current parameters and data before `pos`.
  virtual double predict(const MixedFreqPanel& panel, std::size_t pos) = 0;
  virtual int q_used() const { return 0; }
};

class MfqForecaster final : public Forecaster {
 public:
  MfqForecaster(const ForecastOptions& opt, bool use_midas, bool use_x)
      : opt_(opt) {
    spec_.tau = opt.tau;
    spec_.q = opt.q;
    spec_.k_lags = opt.k_lags;
    spec_.use_midas = use_midas;
    spec_.use_x = use_x;
    if (use_midas) spec_.omega2_grid = default_omega2_grid();
  }

  void fit(const MixedFreqPanel& panel, std::size_t w0, std::size_t w1) override {
    const MixedFreqPanel window = slice_panel(panel, w0, w1);
    if (opt_.q_auto && !q_resolved_) {
      MfqSpec probe = spec_;
      const auto sel = sequential_lag_test(window, probe, opt_.tau, opt_.q_max,
                                           opt_.alpha);
      spec_.q = sel.selected_q;
      q_resolved_ = true;
    }
    model_ = fit_profiled(window, spec_);
  }

  double predict(const MixedFreqPanel& panel, std::size_t pos) override {
    return predict_var(model_, panel, pos);
  }

  int q_used() const override { return spec_.q; }

 private:
  ForecastOptions opt_;
  MfqSpec spec_;
  MfqArchModel model_;
  bool q_resolved_ = false;
};

class CaviarForecaster final : public Forecaster {
 public:
  CaviarForecaster(CaviarVariant variant, const ForecastOptions& opt)
      : variant_(variant), tau_(opt.tau) {
    opts_.seed = opt.seed ^ (0x9e3779b97f4a7c15ull +
                             static_cast<std::uint64_t>(variant));
  }

  void fit(const MixedFreqPanel& panel, std::size_t w0, std::size_t w1) override {
    std::vector<double> rets(panel.ret.begin() + static_cast<std::ptrdiff_t>(w0),
                             panel.ret.begin() + static_cast<std::ptrdiff_t>(w1));
    model_ = fit_caviar(rets, tau_, variant_, opts_);
    w0_ = w0;
  }

  double predict(const MixedFreqPanel& panel, std::size_t pos) override {
    std::vector<double> rets(panel.ret.begin() + static_cast<std::ptrdiff_t>(w0_),
                             panel.ret.begin() + static_cast<std::ptrdiff_t>(pos));
    if (caviar_var_path(variant_, model_.betas, rets, tau_, path_))
      return path_.back();
    // the indirect recursion can exit the admissible region on data beyond
    // the estimation window; floor the argument rather than abort the run
    double v = caviar_detail::init_quantile(rets, tau_);
    for (double r : rets) {
      const double arg = model_.betas(0) + model_.betas(1) * v * v +
                         model_.betas(2) * r * r;
      v = -std::sqrt(std::max(arg, 1e-10));
    }
    return v;
  }

 private:
  CaviarVariant variant_;
  double tau_ = 0.05;
  CaviarOptions opts_;
  CaviarModel model_;
  std::vector<double> path_;
  std::size_t w0_ = 0;
};

class GarchForecaster final : public Forecaster {
 public:
  GarchForecaster(GarchFamily family, GarchDist dist, double tau)
      : family_(family), dist_(dist), tau_(tau) {}

  void fit(const MixedFreqPanel& panel, std::size_t w0, std::size_t w1) override {
    std::vector<double> rets(panel.ret.begin() + static_cast<std::ptrdiff_t>(w0),
                             panel.ret.begin() + static_cast<std::ptrdiff_t>(w1));
    model_ = fit_garch(rets, family_, dist_);
    w0_ = w0;
  }

  double predict(const MixedFreqPanel& panel, std::size_t pos) override {
    std::vector<double> rets(panel.ret.begin() + static_cast<std::ptrdiff_t>(w0_),
                             panel.ret.begin() + static_cast<std::ptrdiff_t>(pos));
    const auto h = filter_variance(model_, rets);
    return var_garch(model_, h.back(), tau_);
  }

 private:
  GarchFamily family_;
  GarchDist dist_;
  double tau_ = 0.05;
  GarchModel model_;
  std::size_t w0_ = 0;
};

class RiskMetricsForecaster final : public Forecaster {
 public:
  explicit RiskMetricsForecaster(double tau) : tau_(tau) {}

  void fit(const MixedFreqPanel& panel, std::size_t w0, std::size_t w1) override {
    if (w1 - w0 < 2)
      throw DataError("riskmetrics: need at least 2 observations");
    (void)panel;
    w0_ = w0;
  }

  double predict(const MixedFreqPanel& panel, std::size_t pos) override {
    std::vector<double> rets(panel.ret.begin() + static_cast<std::ptrdiff_t>(w0_),
                             panel.ret.begin() + static_cast<std::ptrdiff_t>(pos));
    const auto h = fit_riskmetrics(rets);
    return std::sqrt(h.back()) * norm_quantile(tau_);
  }

 private:
  double tau_ = 0.05;
  std::size_t w0_ = 0;
};

class GarchMidasForecaster final : public Forecaster {
 public:
  GarchMidasForecaster(int k_lags, double tau) : k_lags_(k_lags), tau_(tau) {}

  void fit(const MixedFreqPanel& panel, std::size_t w0, std::size_t w1) override {
    model_ = fit_garch_midas(slice_panel(panel, w0, w1), k_lags_);
    w0_ = w0;
  }

  double predict(const MixedFreqPanel& panel, std::size_t pos) override {
    const MixedFreqPanel upto = slice_panel(panel, w0_, pos + 1);
    const auto v = filter_variance(model_, upto);
    return std::sqrt(v.back()) * norm_quantile(tau_);
  }

 private:
  int k_lags_ = 12;
  double tau_ = 0.05;
  GarchMidasModel model_;
  std::size_t w0_ = 0;
};

inline std::unique_ptr<Forecaster> make_forecaster(const std::string& name,
                                                   const ForecastOptions& opt) {
  if (name == "mfqarchx") return std::make_unique<MfqForecaster>(opt, true, true);
  if (name == "mfqarch") return std::make_unique<MfqForecaster>(opt, true, false);
  if (name == "qarch") return std::make_unique<MfqForecaster>(opt, false, false);
  if (name == "sav")
    return std::make_unique<CaviarForecaster>(CaviarVariant::sav, opt);
  if (name == "as")
    return std::make_unique<CaviarForecaster>(CaviarVariant::as, opt);
  if (name == "ig")
    return std::make_unique<CaviarForecaster>(CaviarVariant::ig, opt);
  if (name == "garch")
    return std::make_unique<GarchForecaster>(GarchFamily::garch,
                                             GarchDist::normal, opt.tau);
  if (name == "garch_t")
    return std::make_unique<GarchForecaster>(GarchFamily::garch,
                                             GarchDist::student_t, opt.tau);
  if (name == "gjr")
    return std::make_unique<GarchForecaster>(GarchFamily::gjr,
                                             GarchDist::normal, opt.tau);
  if (name == "gjr_t")
    return std::make_unique<GarchForecaster>(GarchFamily::gjr,
                                             GarchDist::student_t, opt.tau);
  if (name == "riskmetrics")
    return std::make_unique<RiskMetricsForecaster>(opt.tau);
  if (name == "garch_midas")
    return std::make_unique<GarchMidasForecaster>(opt.k_lags, opt.tau);
  throw ConfigError("unknown model: " + name);
}

inline void validate_options(const MixedFreqPanel& panel,
                             const ForecastOptions& opt) {
  if (!(opt.tau > 0.0 && opt.tau < 1.0))
    throw ConfigError("forecast: tau must lie in (0, 1)");
  if (opt.window < 300) throw ConfigError("forecast: window must be >= 300");
  if (opt.stride < 1) throw ConfigError("forecast: stride must be >= 1");
  if (opt.q < 0) throw ConfigError("forecast: q must be >= 0");
  if (opt.q_auto && opt.q_max < 1)
    throw ConfigError("forecast: q_max must be >= 1");
  if (opt.k_lags < 1) throw ConfigError("forecast: k_lags must be >= 1");
  if (opt.oos_begin < opt.window)
    throw DataError(
        "forecast: out-of-sample start leaves less than one window of history");
  if (opt.oos_begin >= panel.n_daily())
    throw DataError("forecast: out-of-sample start beyond the data range");
}

}  // namespace forecast_detail

/// One model's rolling one-step-ahead forecasts over rows
/// [oos_begin, n_daily). Refits happen on days with
/// (pos - oos_begin) % stride == 0; a failed refit past the first keeps the
/// previous parameters.
inline ModelForecast run_forecast_model(const MixedFreqPanel& panel,
                                        const std::string& name,
                                        const ForecastOptions& opt) {
  forecast_detail::validate_options(panel, opt);
  auto fc = forecast_detail::make_forecaster(name, opt);
  const std::size_t n = panel.n_daily();
  ModelForecast out;
  out.model = name;
  std::vector<Date> dates;
  std::vector<double> rets, vars;
  dates.reserve(n - opt.oos_begin);
  rets.reserve(n - opt.oos_begin);
  vars.reserve(n - opt.oos_begin);
  bool have_params = false;
  for (std::size_t pos = opt.oos_begin; pos < n; ++pos) {
    if ((pos - opt.oos_begin) % opt.stride == 0) {
      try {
        fc->fit(panel, pos - opt.window, pos);
        have_params = true;
        ++out.n_refits;
      } catch (const ConfigError&) {
        throw;  // a misconfigured model cannot be carried forward
      } catch (const std::exception&) {
        if (!have_params) throw;
        ++out.n_carried;
      }
    }
    dates.push_back(panel.dates[pos]);
    rets.push_back(panel.ret[pos]);
    vars.push_back(fc->predict(panel, pos));
  }
  out.track = make_track(dates, rets, vars, opt.tau);
  out.q_used = fc->q_used();
  return out;
}

/// Runs the whole model list, models in parallel, results in input order.
inline std::vector<ModelForecast> run_forecast(
    const MixedFreqPanel& panel, const std::vector<std::string>& models,
    const ForecastOptions& opt, unsigned n_threads = 1) {
  if (models.empty()) throw ConfigError("forecast: empty model list");
  forecast_detail::validate_options(panel, opt);
  for (const auto& name : models)
    (void)forecast_detail::make_forecaster(name, opt);  // fail fast on typos
  std::vector<ModelForecast> out(models.size());
  parallel_for(models.size(), n_threads, [&](std::size_t i) {
    out[i] = run_forecast_model(panel, models[i], opt);
  });
  return out;
}

}  // namespace mfq
