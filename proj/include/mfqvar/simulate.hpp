#pragma once

// Data-generating process for the mixed-frequency quantile model, the skewed-t
// innovation sampler, and the Monte Carlo study runner.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <thread>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "mfqvar/errors.hpp"
#include "mfqvar/lag_test.hpp"
#include "mfqvar/mfqarch.hpp"
#include "mfqvar/midas.hpp"
#include "mfqvar/qreg.hpp"
#include "mfqvar/rng.hpp"
#include "mfqvar/stats.hpp"
#include "mfqvar/timegrid.hpp"

namespace mfq {

enum class MvInnovation { skew_t, normal };

struct DgpConfig {
  std::vector<double> betas{0.05, 0.30, 0.25, 0.20, 0.15};  // beta0, beta1..q
  double theta = 0.125;
  double omega2 = 2.0;
  int k_lags = 24;
  double phi = 0.7;
  MvInnovation mv_innovation = MvInnovation::skew_t;
  double mv_df = 7.0;       // skew-t degrees of freedom
  double mv_lambda = -0.95; // skew-t asymmetry in (-1, 1)
  std::size_t n_daily = 2500;
  int days_per_month = 21;
  std::uint64_t seed = 1;
};

inline void validate_dgp(const DgpConfig& cfg) {
  if (cfg.betas.empty() || cfg.betas[0] <= 0.0)
    throw ConfigError("dgp: betas must start with a positive intercept");
  for (double b : cfg.betas)
    if (!std::isfinite(b) || b < 0.0)
      throw ConfigError("dgp: betas must be finite and non-negative");
  if (!std::isfinite(cfg.theta) || cfg.theta < 0.0)
    throw ConfigError("dgp: theta must be finite and non-negative");
  if (!(cfg.omega2 >= 1.0)) throw ConfigError("dgp: omega2 must be >= 1");
  if (cfg.k_lags < 1) throw ConfigError("dgp: k_lags must be >= 1");
  if (!(std::abs(cfg.phi) < 1.0)) throw ConfigError("dgp: |phi| must be < 1");
  if (cfg.mv_innovation == MvInnovation::skew_t) {
    if (!(cfg.mv_df > 2.0)) throw ConfigError("dgp: skew-t df must exceed 2");
    if (!(std::abs(cfg.mv_lambda) < 1.0))
      throw ConfigError("dgp: skew-t asymmetry must lie in (-1, 1)");
  }
  if (cfg.n_daily == 0) throw ConfigError("dgp: n_daily must be positive");
  if (cfg.days_per_month < 5 || cfg.days_per_month > 99)
    throw ConfigError("dgp: days_per_month out of range");
  std::vector<double> lag_betas(cfg.betas.begin() + 1, cfg.betas.end());
  auto rep = check_stationarity(lag_betas, cfg.theta, 0.0, 1.0);
  if (!rep.stationary)
    throw ConfigError("dgp: parameter set fails the stationarity check");
}

/// Hansen-style standardized skewed Student-t draws: zero mean, unit variance,
/// asymmetry lambda in (-1, 1), df > 2. Sampled by CDF inversion.
inline std::vector<double> sample_skew_t(double df, double lambda,
                                         std::size_t n, std::uint64_t seed) {
  if (!(df > 2.0)) throw ConfigError("sample_skew_t: df must exceed 2");
  if (!(std::abs(lambda) < 1.0))
    throw ConfigError("sample_skew_t: asymmetry must lie in (-1, 1)");
  const double c = std::exp(std::lgamma(0.5 * (df + 1.0)) -
                            std::lgamma(0.5 * df)) /
                   std::sqrt(3.14159265358979323846 * (df - 2.0));
  const double a = 4.0 * lambda * c * (df - 2.0) / (df - 1.0);
  const double b = std::sqrt(1.0 + 3.0 * lambda * lambda - a * a);
  const double s = std::sqrt(df / (df - 2.0));
  Rng rng(seed);
  std::vector<double> out(n);
  for (double& v : out) {
    const double u = rng.uniform();
    double z;
    if (u < 0.5 * (1.0 - lambda)) {
      z = (1.0 - lambda) / s * student_t_quantile(u / (1.0 - lambda), df);
    } else {
      z = (1.0 + lambda) / s *
          student_t_quantile((u + lambda) / (1.0 + lambda), df);
    }
    v = (z - a) / b;
  }
  return out;
}

namespace sim_detail {

constexpr std::size_t kBurnDaily = 500;

inline std::vector<double> mv_path(const DgpConfig& cfg, std::size_t n_months,
                                   Rng& rng) {
  const std::size_t burn = 2 * static_cast<std::size_t>(cfg.k_lags);
  std::vector<double> innov;
  if (cfg.mv_innovation == MvInnovation::skew_t)
    innov = sample_skew_t(cfg.mv_df, cfg.mv_lambda, burn + n_months, rng.raw());
  else {
    innov.resize(burn + n_months);
    for (double& e : innov) e = rng.normal();
  }
  std::vector<double> mv(burn + n_months);
  double state = 0.0;
  for (std::size_t t = 0; t < mv.size(); ++t) {
    state = cfg.phi * state + innov[t];
    mv[t] = state;
  }
  mv.erase(mv.begin(), mv.begin() + static_cast<std::ptrdiff_t>(burn));
  return mv;
}

}  // namespace sim_detail

/// Simulates the mixed-frequency process on a synthetic calendar starting
/// 2000-01 with a fixed number of days per month. The returned panel carries
/// k_lags months of volatility history ahead of the first daily month.
inline MixedFreqPanel simulate_dgp(const DgpConfig& cfg) {
  validate_dgp(cfg);
  const std::size_t q = cfg.betas.size() - 1;
  const std::size_t dpm = static_cast<std::size_t>(cfg.days_per_month);
  const std::size_t k = static_cast<std::size_t>(cfg.k_lags);
  const std::size_t n_total = sim_detail::kBurnDaily + cfg.n_daily;
  const std::size_t months_span = (n_total + dpm - 1) / dpm;

  Rng rng(cfg.seed);
  // month position t of the daily sample maps to mv index t + k
  const std::vector<double> mv = sim_detail::mv_path(cfg, months_span + k, rng);

  const auto w = beta_weights(cfg.k_lags, 1.0, cfg.omega2);
  std::vector<double> ws_abs(months_span);
  for (std::size_t t = 0; t < months_span; ++t) {
    double acc = 0.0;
    for (std::size_t j = 1; j <= k; ++j)
      acc += w.weights[j - 1] * mv[t + k - j];
    ws_abs[t] = std::abs(acc);
  }

  std::vector<double> r(n_total, 0.0);
  for (std::size_t i = 0; i < n_total; ++i) {
    double scale = cfg.betas[0] + cfg.theta * ws_abs[i / dpm];
    for (std::size_t j = 1; j <= q; ++j)
      scale += cfg.betas[j] * (i >= j ? std::abs(r[i - j]) : 0.0);
    r[i] = scale * rng.normal();
  }

  // assemble the panel from the post-burn-in segment
  const std::size_t first = sim_detail::kBurnDaily;
  const std::size_t m_first = first / dpm;  // month of the first kept day
  std::vector<DailyObs> daily;
  daily.reserve(cfg.n_daily);
  for (std::size_t i = first; i < n_total; ++i) {
    const std::size_t m = i / dpm;
    DailyObs o;
    o.date = Date{2000 + static_cast<int>(m / 12),
                  1 + static_cast<int>(m % 12),
                  1 + static_cast<int>(i % dpm)};
    o.ret = r[i];
    daily.push_back(o);
  }
  // mv index t+k holds the value of calendar month t; keep k months of
  // history ahead of the first daily month
  std::vector<MonthlyObs> monthly;
  const int base_key = month_key(2000, 1);
  for (std::size_t idx = m_first; idx < mv.size(); ++idx) {
    const int key = base_key + static_cast<int>(idx) - static_cast<int>(k);
    monthly.push_back(MonthlyObs{key, mv[idx]});
  }
  return build_panel(daily, monthly, cfg.k_lags);
}

struct McOptions {
  bool do_recovery = true;  // profiled fit + rescaling per replicate
  bool do_lagtest = false;  // sequential lag selection per replicate
  bool certify = false;     // LP optimality certificate on each final fit
  double alpha = 0.05;      // lag-test level
  int n_threads = 1;
};

/// One Monte Carlo table: structural estimates and lag-test summaries for a
/// single quantile level.
struct McStudyResult {
  double tau = 0.0;
  std::size_t n_daily = 0;
  int r_reps = 0;
  // column layout: gamma0, theta, omega2, gamma_1..gamma_q
  std::vector<std::string> names;
  Eigen::MatrixXd estimates;       // one row per successful replicate
  Eigen::VectorXd mean;
  Eigen::VectorXd mse;             // against the generating values
  std::vector<double> truth;
  std::vector<double> nonrejection_pct;  // per tested lag 1..q_max
  int n_failed = 0;
  int n_cert_failed = 0;
};

namespace sim_detail {

struct RepOutcome {
  bool ok = false;
  std::vector<double> est;
  std::vector<char> nonrejected;
  bool cert_ok = true;
};

inline RepOutcome run_replicate(const MixedFreqPanel& panel,
                                const DgpConfig& cfg, double tau, int q_max,
                                const McOptions& opt) {
  const int q_true = static_cast<int>(cfg.betas.size()) - 1;
  MfqSpec spec;
  spec.tau = tau;
  spec.q = q_true;
  spec.k_lags = cfg.k_lags;
  spec.use_midas = true;
  spec.use_x = false;
  spec.omega2_grid = default_omega2_grid();

  RepOutcome out;
  try {
    if (opt.do_recovery) {
      auto model = fit_profiled(panel, spec);
      const double iq = norm_quantile(tau);
      auto gamma = rescale_to_structural(model, iq);
      out.est.push_back(gamma(0));
      out.est.push_back(gamma(1));
      out.est.push_back(model.omega2_star);
      for (int j = 0; j < q_true; ++j) out.est.push_back(gamma(2 + j));
      if (opt.certify) {
        auto [y, x] = build_design(panel, spec, model.omega2_star);
        auto cert = subgradient_certificate(x, y, tau, model.theta_star);
        out.cert_ok = cert.ok;
      }
    }
    if (opt.do_lagtest) {
      auto sel = sequential_lag_test(panel, spec, tau, q_max, opt.alpha);
      out.nonrejected.resize(sel.steps.size());
      for (std::size_t j = 0; j < sel.steps.size(); ++j)
        out.nonrejected[j] = sel.steps[j].rejected ? 0 : 1;
    }
    out.ok = true;
  } catch (const EstimationError&) {
    out.ok = false;
  }
  return out;
}

}  // namespace sim_detail

/// Runs the Monte Carlo study: r_reps replicates of the process, each fitted
/// and rescaled at every quantile level, with optional sequential lag tests.
/// Replicate panels derive from per-index RNG streams, so results do not
/// depend on thread count. Failed replicates are excluded and counted.
inline std::vector<McStudyResult> run_mc_study(const DgpConfig& cfg, int r_reps,
                                               const std::vector<double>& tau_levels,
                                               int q_max,
                                               const McOptions& opt = {}) {
  validate_dgp(cfg);
  if (r_reps < 1) throw ConfigError("run_mc_study: r_reps must be >= 1");
  if (tau_levels.empty())
    throw ConfigError("run_mc_study: need at least one quantile level");
  for (double t : tau_levels)
    if (!(t > 0.0 && t < 1.0))
      throw ConfigError("run_mc_study: tau levels must lie in (0, 1)");
  if (opt.do_lagtest && q_max < 1)
    throw ConfigError("run_mc_study: q_max must be >= 1 for the lag test");

  const std::size_t n_tau = tau_levels.size();
  std::vector<std::vector<sim_detail::RepOutcome>> slots(
      n_tau, std::vector<sim_detail::RepOutcome>(static_cast<std::size_t>(r_reps)));

  auto worker = [&](int lo, int hi) {
    for (int rep = lo; rep < hi; ++rep) {
      DgpConfig rep_cfg = cfg;
      rep_cfg.seed = Rng::stream(cfg.seed, static_cast<std::uint64_t>(rep)).raw();
      const MixedFreqPanel panel = simulate_dgp(rep_cfg);
      for (std::size_t ti = 0; ti < n_tau; ++ti)
        slots[ti][static_cast<std::size_t>(rep)] = sim_detail::run_replicate(
            panel, cfg, tau_levels[ti], q_max, opt);
    }
  };
  const int n_threads = std::max(1, opt.n_threads);
  if (n_threads == 1) {
    worker(0, r_reps);
  } else {
    std::vector<std::thread> pool;
    const int chunk = (r_reps + n_threads - 1) / n_threads;
    for (int t = 0; t < n_threads; ++t) {
      const int lo = t * chunk, hi = std::min(r_reps, lo + chunk);
      if (lo >= hi) break;
      pool.emplace_back(worker, lo, hi);
    }
    for (auto& th : pool) th.join();
  }

  const int q_true = static_cast<int>(cfg.betas.size()) - 1;
  std::vector<McStudyResult> results;
  for (std::size_t ti = 0; ti < n_tau; ++ti) {
    McStudyResult res;
    res.tau = tau_levels[ti];
    res.n_daily = cfg.n_daily;
    res.r_reps = r_reps;
    res.names = {"gamma0", "theta", "omega2"};
    res.truth = {cfg.betas[0], cfg.theta, cfg.omega2};
    for (int j = 1; j <= q_true; ++j) {
      res.names.push_back("gamma" + std::to_string(j));
      res.truth.push_back(cfg.betas[static_cast<std::size_t>(j)]);
    }
    const std::size_t p = res.names.size();

    std::vector<const sim_detail::RepOutcome*> good;
    for (const auto& slot : slots[ti]) {
      if (slot.ok)
        good.push_back(&slot);
      else
        ++res.n_failed;
    }
    if (opt.do_recovery) {
      res.estimates.resize(static_cast<Eigen::Index>(good.size()),
                           static_cast<Eigen::Index>(p));
      for (std::size_t g = 0; g < good.size(); ++g) {
        for (std::size_t c = 0; c < p; ++c)
          res.estimates(static_cast<Eigen::Index>(g),
                        static_cast<Eigen::Index>(c)) = good[g]->est[c];
        if (!good[g]->cert_ok) ++res.n_cert_failed;
      }
      res.mean = res.estimates.colwise().mean();
      res.mse.resize(static_cast<Eigen::Index>(p));
      for (std::size_t c = 0; c < p; ++c) {
        const auto col = res.estimates.col(static_cast<Eigen::Index>(c));
        res.mse(static_cast<Eigen::Index>(c)) =
            (col.array() - res.truth[c]).square().mean();
      }
    }
    if (opt.do_lagtest) {
      res.nonrejection_pct.assign(static_cast<std::size_t>(q_max), 0.0);
      for (const auto* g : good)
        for (std::size_t j = 0; j < g->nonrejected.size(); ++j)
          res.nonrejection_pct[j] += g->nonrejected[j];
      if (!good.empty())
        for (double& v : res.nonrejection_pct)
          v *= 100.0 / static_cast<double>(good.size());
    }
    results.push_back(std::move(res));
  }
  return results;
}

}  // namespace mfq
