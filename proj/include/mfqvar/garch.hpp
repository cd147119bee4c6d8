#pragma once

// GARCH(1,1) and GJR-GARCH(1,1) with normal or standardized Student-t errors,
// plus the fixed-parameter RiskMetrics filter. Zero conditional mean.

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include <Eigen/Dense>

#include "mfqvar/errors.hpp"
#include "mfqvar/optim.hpp"
#include "mfqvar/stats.hpp"

namespace mfq {

enum class GarchFamily { garch, gjr };
enum class GarchDist { normal, student_t };

struct GarchModel {
  GarchFamily family = GarchFamily::garch;
  GarchDist dist = GarchDist::normal;
  double alpha0 = 0.0;
  double alpha1 = 0.0;
  double gamma1 = 0.0;  // zero for the plain GARCH family
  double beta1 = 0.0;
  double nu = std::numeric_limits<double>::infinity();  // student_t only
  double loglik = 0.0;
  bool converged = false;
  std::size_t n_obs = 0;
};

struct GarchOptions {
  int max_eval = 6000;
  bool extra_starts = true;  // false: single start (faster, for sweeps)
};

namespace garch_detail {

constexpr double kPi = 3.14159265358979323846;
constexpr double kPersistCap = 0.999;

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }
inline double logit(double p) { return std::log(p / (1.0 - p)); }

/// Maps the unconstrained optimizer vector to model parameters. Layout:
/// [log alpha0, persistence logit, split logits..., log(nu-2) if student_t].
inline GarchModel decode(const Eigen::VectorXd& p, GarchFamily family,
                         GarchDist dist) {
  GarchModel m;
  m.family = family;
  m.dist = dist;
  m.alpha0 = std::exp(p(0));
  const double persist = kPersistCap * sigmoid(p(1));
  if (family == GarchFamily::garch) {
    const double split = sigmoid(p(2));
    m.alpha1 = persist * split;
    m.beta1 = persist * (1.0 - split);
  } else {
    const double e1 = std::exp(p(2) - std::max({p(2), p(3), p(4)}));
    const double e2 = std::exp(p(3) - std::max({p(2), p(3), p(4)}));
    const double e3 = std::exp(p(4) - std::max({p(2), p(3), p(4)}));
    const double tot = e1 + e2 + e3;
    m.alpha1 = persist * e1 / tot;
    m.gamma1 = 2.0 * persist * e2 / tot;
    m.beta1 = persist * e3 / tot;
  }
  if (dist == GarchDist::student_t) m.nu = 2.1 + std::exp(p(p.size() - 1));
  return m;
}

inline int n_free(GarchFamily family, GarchDist dist) {
  return (family == GarchFamily::garch ? 3 : 5) +
         (dist == GarchDist::student_t ? 1 : 0);
}

inline double sample_variance(const std::vector<double>& r) {
  if (r.empty()) return 0.0;
  double mu = 0.0;
  for (double x : r) mu += x;
  mu /= static_cast<double>(r.size());
  double acc = 0.0;
  for (double x : r) acc += (x - mu) * (x - mu);
  return acc / static_cast<double>(r.size());
}

inline double log_density(double r, double h, GarchDist dist, double nu) {
  const double x2 = r * r / h;
  if (dist == GarchDist::normal)
    return -0.5 * (std::log(2.0 * kPi) + std::log(h) + x2);
  const double c = std::lgamma(0.5 * (nu + 1.0)) - std::lgamma(0.5 * nu) -
                   0.5 * std::log(kPi * (nu - 2.0));
  return c - 0.5 * (nu + 1.0) * std::log1p(x2 / (nu - 2.0)) -
         0.5 * std::log(h);
}

}  // namespace garch_detail

/// Conditional variances implied by the model: out[t] applies to returns[t],
/// out[n] is the one-step-ahead forecast. out[0] is the sample variance.
inline std::vector<double> filter_variance(const GarchModel& m,
                                           const std::vector<double>& returns) {
  const std::size_t n = returns.size();
  std::vector<double> h(n + 1);
  h[0] = garch_detail::sample_variance(returns);
  for (std::size_t t = 1; t <= n; ++t) {
    const double r = returns[t - 1];
    const double arch =
        (m.alpha1 + (r < 0.0 ? m.gamma1 : 0.0)) * r * r;
    h[t] = m.alpha0 + arch + m.beta1 * h[t - 1];
  }
  return h;
}

inline double garch_loglik(const GarchModel& m,
                           const std::vector<double>& returns) {
  const auto h = filter_variance(m, returns);
  double ll = 0.0;
  for (std::size_t t = 0; t < returns.size(); ++t) {
    if (!(h[t] > 0.0)) return -std::numeric_limits<double>::infinity();
    ll += garch_detail::log_density(returns[t], h[t], m.dist, m.nu);
  }
  return ll;
}

inline GarchModel fit_garch(const std::vector<double>& returns,
                            GarchFamily family, GarchDist dist,
                            const GarchOptions& opt = {}) {
  if (returns.size() < 250)
    throw DataError("fit_garch: need at least 250 observations");
  double ms = 0.0;
  for (double r : returns) {
    if (!std::isfinite(r)) throw DataError("fit_garch: non-finite return");
    ms += r * r;
  }
  ms /= static_cast<double>(returns.size());
  if (!(ms > 0.0)) throw DataError("fit_garch: returns are identically zero");

  using namespace garch_detail;
  auto objective = [&](const Eigen::VectorXd& p) {
    const GarchModel m = decode(p, family, dist);
    const double ll = garch_loglik(m, returns);
    return std::isfinite(ll) ? -ll : std::numeric_limits<double>::infinity();
  };

  const int k = n_free(family, dist);
  auto encode_start = [&](double a1, double g1, double b1, double nu0) {
    Eigen::VectorXd p(k);
    const double persist = std::min(kPersistCap - 1e-6, a1 + 0.5 * g1 + b1);
    p(0) = std::log(std::max(1e-12, ms * (1.0 - persist)));
    p(1) = logit(persist / kPersistCap);
    if (family == GarchFamily::garch) {
      p(2) = logit(std::min(1.0 - 1e-9, a1 / persist));
    } else {
      p(2) = std::log(std::max(1e-9, a1 / persist));
      p(3) = std::log(std::max(1e-9, 0.5 * g1 / persist));
      p(4) = std::log(std::max(1e-9, b1 / persist));
    }
    if (dist == GarchDist::student_t) p(k - 1) = std::log(nu0 - 2.1);
    return p;
  };

  std::vector<Eigen::VectorXd> starts;
  starts.push_back(encode_start(0.08, 0.04, 0.85, 8.0));
  if (opt.extra_starts) {
    starts.push_back(encode_start(0.15, 0.05, 0.70, 6.0));
    starts.push_back(encode_start(0.03, 0.02, 0.94, 12.0));
  }

  GarchModel best;
  double best_f = std::numeric_limits<double>::infinity();
  bool best_conv = false;
  for (const auto& s : starts) {
    auto r = nelder_mead(objective, s, 0.25, opt.max_eval, 1e-9);
    if (r.f < best_f) {
      best_f = r.f;
      best = decode(r.x, family, dist);
      best_conv = r.converged;
    }
  }
  if (!std::isfinite(best_f))
    throw EstimationError("fit_garch: likelihood never became finite");
  best.loglik = -best_f;
  best.converged = best_conv;
  best.n_obs = returns.size();
  return best;
}

/// VaR from a variance forecast: sqrt(h) times the unit-variance quantile of
/// the innovation distribution.
inline double var_garch(const GarchModel& m, double h_next, double tau) {
  if (!(h_next > 0.0)) throw ConfigError("var_garch: variance must be positive");
  if (!(tau > 0.0 && tau < 1.0))
    throw ConfigError("var_garch: tau must lie in (0, 1)");
  if (m.dist == GarchDist::normal)
    return std::sqrt(h_next) * norm_quantile(tau);
  return std::sqrt(h_next) * student_t_quantile(tau, m.nu) *
         std::sqrt((m.nu - 2.0) / m.nu);
}

/// Exponentially weighted variance filter with the fixed daily decay 0.94;
/// out[t] applies to returns[t], out[n] is the one-step-ahead value.
inline std::vector<double> fit_riskmetrics(const std::vector<double>& returns) {
  if (returns.size() < 2)
    throw DataError("fit_riskmetrics: need at least 2 observations");
  const std::size_t n = returns.size();
  std::vector<double> h(n + 1);
  for (double r : returns)
    if (!std::isfinite(r)) throw DataError("fit_riskmetrics: non-finite return");
  h[0] = garch_detail::sample_variance(returns);
  for (std::size_t t = 1; t <= n; ++t)
    h[t] = 0.94 * h[t - 1] + 0.06 * returns[t - 1] * returns[t - 1];
  return h;
}

}  // namespace mfq
