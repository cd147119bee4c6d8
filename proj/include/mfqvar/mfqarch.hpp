#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <utility>
#include <vector>

#include <Eigen/Core>
#include <Eigen/Eigenvalues>

#include "mfqvar/errors.hpp"
#include "mfqvar/midas.hpp"
#include "mfqvar/qreg.hpp"
#include "mfqvar/stats.hpp"
#include "mfqvar/timegrid.hpp"

namespace mfq {

/// Model layout switches. Regressor order is fixed: intercept, |WS| when
/// use_midas, q absolute daily return lags, lagged |X| when use_x.
struct MfqSpec {
  double tau = 0.05;
  int q = 0;
  int k_lags = 12;
  bool use_midas = true;
  bool use_x = false;
  std::vector<double> omega2_grid;

  int n_cols() const { return 1 + (use_midas ? 1 : 0) + q + (use_x ? 1 : 0); }
};

/// 100 log-spaced grid points on [1.001, 50]: dense near slow decay, still
/// covering near-one-lag concentration.
inline std::vector<double> default_omega2_grid() {
  const int b = 100;
  const double lo = std::log(1.001), hi = std::log(50.0);
  std::vector<double> grid(b);
  for (int i = 0; i < b; ++i)
    grid[static_cast<std::size_t>(i)] =
        std::exp(lo + (hi - lo) * static_cast<double>(i) / (b - 1));
  return grid;
}

inline void validate_spec(const MfqSpec& spec) {
  if (!(spec.tau > 0.0 && spec.tau < 1.0))
    throw ConfigError("mfqarch: tau must be in (0,1)");
  if (spec.q < 0) throw ConfigError("mfqarch: q must be >= 0");
  if (spec.k_lags < 1) throw ConfigError("mfqarch: k_lags must be >= 1");
  if (spec.use_midas) {
    if (spec.omega2_grid.empty()) throw ConfigError("mfqarch: empty omega2 grid");
    double prev = 0.0;
    for (double w : spec.omega2_grid) {
      if (!(w >= 1.0)) throw ConfigError("mfqarch: omega2 grid values must be >= 1");
      if (w < prev) throw ConfigError("mfqarch: omega2 grid must be sorted ascending");
      prev = w;
    }
  }
}

struct MfqArchModel {
  MfqSpec spec;
  Eigen::VectorXd theta_star;   // reduced-form coefficients, F^{-1}(tau) scale
  double omega2_star = std::numeric_limits<double>::quiet_NaN();
  double loss_star = 0.0;
  std::vector<double> grid_losses;   // +inf marks a failed grid point
  int grid_failures = 0;
  BetaWeights weights;          // weights at omega2_star when use_midas
  std::size_t row_begin = 0;    // first daily row entering the estimation
  std::size_t n_obs = 0;
  bool converged = false;
};

namespace mfq_detail {

constexpr std::size_t kAutoRow = static_cast<std::size_t>(-1);

inline std::size_t default_row_begin(const MfqSpec& spec) {
  return static_cast<std::size_t>(std::max(spec.q, spec.use_x ? 1 : 0));
}

inline void check_panel_compat(const MixedFreqPanel& panel, const MfqSpec& spec) {
  if (spec.use_x && !panel.has_x)
    throw ConfigError("mfqarch: spec requires the X column but the panel has none");
  if (spec.use_midas && panel.k_lags < spec.k_lags)
    throw DataError("mfqarch: panel was built with fewer monthly lags than k_lags");
}

/// |WS| by month position over [t_lo, t_hi], so the per-day column fill is a
/// table lookup. Positions index into the vector directly.
inline std::vector<double> ws_table(const MixedFreqPanel& panel, const BetaWeights& w,
                                    int t_lo, int t_hi) {
  std::vector<double> table(static_cast<std::size_t>(t_hi) + 1, 0.0);
  for (int t = t_lo; t <= t_hi; ++t)
    table[static_cast<std::size_t>(t)] = std::abs(weighted_sum(panel, t, w));
  return table;
}

/// Fills everything except the |WS| column (left zero when use_midas).
inline void fill_static_columns(const MixedFreqPanel& panel, const MfqSpec& spec,
                                std::size_t row_begin, Eigen::VectorXd& y,
                                Eigen::MatrixXd& x) {
  const std::size_t n = panel.n_daily();
  const Eigen::Index rows = static_cast<Eigen::Index>(n - row_begin);
  y.resize(rows);
  x.setZero(rows, spec.n_cols());
  const int lag_col0 = spec.use_midas ? 2 : 1;
  for (std::size_t pos = row_begin; pos < n; ++pos) {
    const Eigen::Index r = static_cast<Eigen::Index>(pos - row_begin);
    y(r) = panel.ret[pos];
    x(r, 0) = 1.0;
    for (int j = 1; j <= spec.q; ++j)
      x(r, lag_col0 + j - 1) = std::abs(panel.ret[pos - static_cast<std::size_t>(j)]);
    if (spec.use_x) x(r, spec.n_cols() - 1) = std::abs(panel.x[pos - 1]);
  }
}

inline void fill_ws_column(const MixedFreqPanel& panel, std::size_t row_begin,
                           const std::vector<double>& ws, Eigen::MatrixXd& x) {
  const std::size_t n = panel.n_daily();
  for (std::size_t pos = row_begin; pos < n; ++pos)
    x(static_cast<Eigen::Index>(pos - row_begin), 1) =
        ws[static_cast<std::size_t>(panel.month_of[pos])];
}

}  // namespace mfq_detail

/// Response and regressor matrix for one omega2 value. Row `r` of the design
/// explains the return at daily position row_begin + r.
inline std::pair<Eigen::VectorXd, Eigen::MatrixXd> build_design(
    const MixedFreqPanel& panel, const MfqSpec& spec, double omega2,
    std::size_t row_begin = mfq_detail::kAutoRow) {
  validate_spec(spec);
  mfq_detail::check_panel_compat(panel, spec);
  if (row_begin == mfq_detail::kAutoRow) row_begin = mfq_detail::default_row_begin(spec);
  if (row_begin < mfq_detail::default_row_begin(spec))
    throw InsufficientHistoryError("build_design: row_begin lacks the required lags");
  if (row_begin >= panel.n_daily())
    throw InsufficientHistoryError("build_design: no rows left after lag trimming");

  Eigen::VectorXd y;
  Eigen::MatrixXd x;
  mfq_detail::fill_static_columns(panel, spec, row_begin, y, x);
  if (spec.use_midas) {
    const BetaWeights w = beta_weights(spec.k_lags, 1.0, omega2);
    const int t_lo = panel.month_of[row_begin];
    const int t_hi = panel.month_of[panel.n_daily() - 1];
    mfq_detail::fill_ws_column(panel, row_begin,
                               mfq_detail::ws_table(panel, w, t_lo, t_hi), x);
  }
  return {std::move(y), std::move(x)};
}

/// Profiled estimation: one quantile fit per omega2 grid point, keeping the
/// loss minimizer (ties broken toward the smallest omega2, independent of
/// grid order). Grid points whose fit fails are skipped and counted;
/// estimation fails only when every point does.
inline MfqArchModel fit_profiled(const MixedFreqPanel& panel, const MfqSpec& spec,
                                 const QregOptions& opt = {},
                                 std::size_t row_begin = mfq_detail::kAutoRow) {
  validate_spec(spec);
  mfq_detail::check_panel_compat(panel, spec);
  if (row_begin == mfq_detail::kAutoRow) row_begin = mfq_detail::default_row_begin(spec);

  MfqArchModel model;
  model.spec = spec;
  model.row_begin = row_begin;

  if (!spec.use_midas) {
    auto [y, x] = build_design(panel, spec, 1.0, row_begin);
    auto f = fit(x, y, spec.tau, opt);
    model.theta_star = f.theta;
    model.loss_star = f.loss;
    model.grid_losses = {f.loss};
    model.n_obs = f.n_obs;
    model.converged = f.converged;
    return model;
  }

  if (row_begin < mfq_detail::default_row_begin(spec))
    throw InsufficientHistoryError("fit_profiled: row_begin lacks the required lags");
  if (row_begin >= panel.n_daily())
    throw InsufficientHistoryError("fit_profiled: no rows left after lag trimming");

  Eigen::VectorXd y;
  Eigen::MatrixXd x;
  mfq_detail::fill_static_columns(panel, spec, row_begin, y, x);
  const int t_lo = panel.month_of[row_begin];
  const int t_hi = panel.month_of[panel.n_daily() - 1];

  const std::size_t b = spec.omega2_grid.size();
  model.grid_losses.assign(b, std::numeric_limits<double>::infinity());
  QregSolver solver;
  double best_loss = std::numeric_limits<double>::infinity();
  double best_omega2 = std::numeric_limits<double>::infinity();
  QuantileFit best_fit;
  BetaWeights best_w;
  for (std::size_t i = 0; i < b; ++i) {
    const double omega2 = spec.omega2_grid[i];
    const BetaWeights w = beta_weights(spec.k_lags, 1.0, omega2);
    mfq_detail::fill_ws_column(panel, row_begin,
                               mfq_detail::ws_table(panel, w, t_lo, t_hi), x);
    QuantileFit f;
    try {
      f = solver.run(x, y, spec.tau, opt);
    } catch (const EstimationError&) {
      ++model.grid_failures;
      continue;
    }
    model.grid_losses[i] = f.loss;
    if (f.loss < best_loss || (f.loss == best_loss && omega2 < best_omega2)) {
      best_loss = f.loss;
      best_omega2 = omega2;
      best_fit = f;
      best_w = w;
    }
  }
  if (!std::isfinite(best_loss))
    throw EstimationError("fit_profiled: every omega2 grid point failed");

  model.theta_star = best_fit.theta;
  model.omega2_star = best_omega2;
  model.loss_star = best_loss;
  model.weights = best_w;
  model.n_obs = best_fit.n_obs;
  model.converged = best_fit.converged;
  return model;
}

/// One-step-ahead conditional quantile at daily position pos: the fitted
/// regressor row dotted with theta_star.
inline double predict_var(const MfqArchModel& model, const MixedFreqPanel& panel,
                          std::size_t pos) {
  const MfqSpec& spec = model.spec;
  mfq_detail::check_panel_compat(panel, spec);
  if (pos >= panel.n_daily())
    throw InsufficientHistoryError("predict_var: position out of range");
  if (pos < mfq_detail::default_row_begin(spec))
    throw InsufficientHistoryError("predict_var: position lacks the required lags");

  double v = model.theta_star(0);
  int col = 1;
  if (spec.use_midas) {
    const double ws = std::abs(weighted_sum(panel, panel.month_of[pos], model.weights));
    v += model.theta_star(col++) * ws;
  }
  for (int j = 1; j <= spec.q; ++j)
    v += model.theta_star(col++) * std::abs(panel.ret[pos - static_cast<std::size_t>(j)]);
  if (spec.use_x) v += model.theta_star(col) * std::abs(panel.x[pos - 1]);
  return v;
}

/// Divides the reduced-form coefficients by the known innovation quantile,
/// recovering the structural scale parameters in simulation studies.
inline Eigen::VectorXd rescale_to_structural(const MfqArchModel& model,
                                             double innovation_quantile) {
  if (!(std::abs(innovation_quantile) > 1e-12))
    throw RescaleError("rescale_to_structural: innovation quantile is zero");
  return model.theta_star / innovation_quantile;
}

struct StationarityReport {
  double spectral_radius = 0.0;
  bool stationary = true;
  double z_r = 1.0;
  int r_moment = 2;
};

/// Spectral-radius stationarity check on the (q+2)x(q+2) companion matrix:
/// top row (z_r b1 ... z_r bq, z_r theta, z_r beta_x), an identity shift
/// block under the return lags, and two zero rows for the exogenous states.
/// theta and beta_x occupy nilpotent columns, so only the return-lag block
/// drives the radius; q = 0 has no feedback at all.
inline StationarityReport check_stationarity(const std::vector<double>& structural_betas,
                                             double theta, double beta_x, double z_r,
                                             int r_moment = 2) {
  StationarityReport rep;
  rep.z_r = z_r;
  rep.r_moment = r_moment;
  const int q = static_cast<int>(structural_betas.size());
  if (q == 0) {
    rep.spectral_radius = 0.0;
    rep.stationary = true;
    return rep;
  }
  const int m = q + 2;
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(m, m);
  for (int j = 0; j < q; ++j) a(0, j) = z_r * structural_betas[static_cast<std::size_t>(j)];
  a(0, q) = z_r * theta;
  a(0, q + 1) = z_r * beta_x;
  for (int r = 1; r < q; ++r) a(r, r - 1) = 1.0;
  Eigen::EigenSolver<Eigen::MatrixXd> es(a, false);
  rep.spectral_radius = es.eigenvalues().cwiseAbs().maxCoeff();
  rep.stationary = rep.spectral_radius < 1.0;
  return rep;
}

}  // namespace mfq
