#pragma once

// GARCH-MIDAS with a GJR-type short-run component and an exponential long-run
// component driven by Beta-weighted monthly variables.

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include <Eigen/Dense>

#include "mfqvar/errors.hpp"
#include "mfqvar/garch.hpp"
#include "mfqvar/midas.hpp"
#include "mfqvar/optim.hpp"
#include "mfqvar/timegrid.hpp"

namespace mfq {

struct GarchMidasModel {
  double alpha1 = 0.0;
  double gamma1 = 0.0;
  double beta1 = 0.0;
  double m = 0.0;      // long-run log level
  double zeta = 0.0;   // loading on the weighted monthly variable
  double omega2 = 1.0; // Beta weight decay, omega1 fixed at 1
  int k_lags = 12;
  double loglik = 0.0;
  bool converged = false;
  std::size_t n_obs = 0;
};

namespace gm_detail {

/// Long-run component per month position; the monthly variable enters raw.
inline std::vector<double> long_run(const GarchMidasModel& model,
                                    const MixedFreqPanel& panel) {
  const auto w = beta_weights(model.k_lags, 1.0, model.omega2);
  const std::size_t t_lo = panel.month_of.front();
  const std::size_t t_hi = panel.month_of.back();
  std::vector<double> tau_m(t_hi + 1, 0.0);
  for (std::size_t t = t_lo; t <= t_hi; ++t)
    tau_m[t] = std::exp(model.m + model.zeta * weighted_sum(panel, t, w));
  return tau_m;
}

}  // namespace gm_detail

/// Conditional variance path tau_t * xi_i over the panel's daily sample. The
/// short-run component starts at its unit unconditional mean.
inline std::vector<double> filter_variance(const GarchMidasModel& model,
                                           const MixedFreqPanel& panel) {
  if (panel.k_lags < model.k_lags)
    throw DataError("garch_midas: panel carries fewer monthly lags than the model");
  const auto tau_m = gm_detail::long_run(model, panel);
  const double icept = 1.0 - model.alpha1 - model.beta1 - 0.5 * model.gamma1;
  const std::size_t n = panel.n_daily();
  std::vector<double> v(n);
  double xi = 1.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (i > 0) {
      const double r = panel.ret[i - 1];
      const double tau_cur = tau_m[panel.month_of[i]];
      xi = icept +
           (model.alpha1 + (r < 0.0 ? model.gamma1 : 0.0)) * r * r / tau_cur +
           model.beta1 * xi;
    }
    v[i] = tau_m[panel.month_of[i]] * xi;
  }
  return v;
}

inline double garch_midas_loglik(const GarchMidasModel& model,
                                 const MixedFreqPanel& panel) {
  const auto v = filter_variance(model, panel);
  double ll = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!(v[i] > 0.0)) return -std::numeric_limits<double>::infinity();
    ll += -0.5 * (std::log(2.0 * garch_detail::kPi) + std::log(v[i]) +
                  panel.ret[i] * panel.ret[i] / v[i]);
  }
  return ll;
}

inline GarchMidasModel fit_garch_midas(const MixedFreqPanel& panel, int k_lags,
                                       const GarchOptions& opt = {}) {
  if (k_lags < 1) throw ConfigError("fit_garch_midas: k_lags must be >= 1");
  if (panel.k_lags < k_lags)
    throw DataError("fit_garch_midas: panel carries fewer monthly lags than requested");

  using garch_detail::kPersistCap;
  using garch_detail::logit;
  using garch_detail::sigmoid;

  auto decode = [&](const Eigen::VectorXd& p) {
    GarchMidasModel m;
    m.k_lags = k_lags;
    const double persist = kPersistCap * sigmoid(p(0));
    const double mx = std::max({p(1), p(2), p(3)});
    const double e1 = std::exp(p(1) - mx), e2 = std::exp(p(2) - mx),
                 e3 = std::exp(p(3) - mx);
    const double tot = e1 + e2 + e3;
    m.alpha1 = persist * e1 / tot;
    m.gamma1 = 2.0 * persist * e2 / tot;
    m.beta1 = persist * e3 / tot;
    m.m = p(4);
    m.zeta = p(5);
    m.omega2 = 1.0 + std::exp(std::min(p(6), 12.0));
    return m;
  };
  auto objective = [&](const Eigen::VectorXd& p) {
    const double ll = garch_midas_loglik(decode(p), panel);
    return std::isfinite(ll) ? -ll : std::numeric_limits<double>::infinity();
  };

  double ms = 0.0;
  for (double r : panel.ret) ms += r * r;
  ms /= static_cast<double>(panel.n_daily());
  if (!(ms > 0.0))
    throw DataError("fit_garch_midas: returns are identically zero");

  auto encode_start = [&](double a1, double g1, double b1, double zeta0,
                          double om0) {
    Eigen::VectorXd p(7);
    const double persist = std::min(kPersistCap - 1e-6, a1 + 0.5 * g1 + b1);
    p(0) = logit(persist / kPersistCap);
    p(1) = std::log(std::max(1e-9, a1 / persist));
    p(2) = std::log(std::max(1e-9, 0.5 * g1 / persist));
    p(3) = std::log(std::max(1e-9, b1 / persist));
    p(4) = std::log(ms);
    p(5) = zeta0;
    p(6) = std::log(om0 - 1.0);
    return p;
  };

  std::vector<Eigen::VectorXd> starts;
  starts.push_back(encode_start(0.08, 0.04, 0.85, 0.0, 3.0));
  if (opt.extra_starts) {
    starts.push_back(encode_start(0.05, 0.10, 0.80, 0.3, 1.5));
    starts.push_back(encode_start(0.12, 0.02, 0.80, -0.3, 6.0));
  }

  GarchMidasModel best;
  double best_f = std::numeric_limits<double>::infinity();
  bool best_conv = false;
  for (const auto& s : starts) {
    auto r = nelder_mead(objective, s, 0.3, opt.max_eval, 1e-9);
    if (r.f < best_f) {
      best_f = r.f;
      best = decode(r.x);
      best_conv = r.converged;
    }
  }
  if (!std::isfinite(best_f))
    throw EstimationError("fit_garch_midas: likelihood never became finite");
  best.loglik = -best_f;
  best.converged = best_conv;
  best.n_obs = panel.n_daily();
  return best;
}

}  // namespace mfq
