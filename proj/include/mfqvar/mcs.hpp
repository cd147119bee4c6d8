#pragma once

// Model Confidence Set over VaR loss tracks: semi-quadratic statistic over
// unordered model pairs, circular block bootstrap, max-t elimination.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "mfqvar/backtest.hpp"
#include "mfqvar/errors.hpp"
#include "mfqvar/rng.hpp"

namespace mfq {

struct LossPanel {
  std::vector<std::string> models;
  Eigen::MatrixXd losses;  // n_days x M
  double tau = 0.0;
};

/// Asymmetric quantile loss per observation; zero exactly when ret == var.
inline std::vector<double> quantile_loss_series(const VarTrack& track) {
  std::vector<double> out;
  out.reserve(track.records.size());
  for (const auto& r : track.records)
    out.push_back((track.tau - (r.ret < r.var ? 1.0 : 0.0)) * (r.ret - r.var));
  return out;
}

struct McsReport {
  std::vector<std::string> models;
  std::vector<double> mean_loss;
  // eliminated models in order, with running-maximum p-values; the models
  // never eliminated close the list with p = 1
  std::vector<std::pair<std::string, double>> elimination_order;
  std::map<double, std::vector<std::string>> survivors;  // confidence -> set
  double tau = 0.0;
  double delta = 0.0;
};

inline void validate_loss_panel(const LossPanel& panel) {
  if (panel.models.size() < 2)
    throw ConfigError("mcs: need at least two models");
  if (panel.losses.cols() != static_cast<Eigen::Index>(panel.models.size()))
    throw DataError("mcs: model list and loss columns disagree");
  if (panel.losses.rows() < 2) throw DataError("mcs: need at least two days");
  if (!panel.losses.allFinite()) throw DataError("mcs: non-finite loss");
}

/// Sequential equal-predictive-ability testing. The elimination order and the
/// running-maximum p-values do not depend on delta; delta picks the headline
/// survivor set, and the 0.75 / 0.90 sets are always reported.
inline McsReport run_mcs(const LossPanel& panel, double delta = 0.10,
                         int n_boot = 5000, int block_len = 10,
                         std::uint64_t seed = 1) {
  validate_loss_panel(panel);
  if (!(delta > 0.0 && delta < 1.0))
    throw ConfigError("mcs: delta must lie in (0, 1)");
  if (n_boot < 1000) throw ConfigError("mcs: need at least 1000 bootstrap draws");
  if (block_len < 1) throw ConfigError("mcs: block length must be >= 1");

  const std::size_t n = static_cast<std::size_t>(panel.losses.rows());
  const std::size_t m_all = panel.models.size();
  const std::size_t b_reps = static_cast<std::size_t>(n_boot);

  // per-replicate bootstrap column means, shared across all pairs and rounds
  Eigen::VectorXd full_mean = panel.losses.colwise().mean();
  Eigen::MatrixXd boot_mean(b_reps, m_all);
  {
    const std::size_t bl = static_cast<std::size_t>(block_len);
    std::vector<std::size_t> rows(n);
    for (std::size_t b = 0; b < b_reps; ++b) {
      Rng rng = Rng::stream(seed, b);
      std::size_t filled = 0;
      while (filled < n) {
        const std::size_t start = rng.below(n);
        for (std::size_t j = 0; j < bl && filled < n; ++j)
          rows[filled++] = (start + j) % n;
      }
      Eigen::RowVectorXd acc = Eigen::RowVectorXd::Zero(
          static_cast<Eigen::Index>(m_all));
      for (std::size_t r : rows)
        acc += panel.losses.row(static_cast<Eigen::Index>(r));
      boot_mean.row(static_cast<Eigen::Index>(b)) =
          acc / static_cast<double>(n);
    }
  }

  McsReport report;
  report.models = panel.models;
  report.tau = panel.tau;
  report.delta = delta;
  report.mean_loss.assign(full_mean.data(), full_mean.data() + full_mean.size());

  std::vector<std::size_t> active(m_all);
  for (std::size_t i = 0; i < m_all; ++i) active[i] = i;
  std::vector<std::pair<std::string, double>> raw_elims;

  auto eliminate = [&](std::size_t pos, double p_raw) {
    raw_elims.emplace_back(panel.models[active[pos]], p_raw);
    active.erase(active.begin() + static_cast<std::ptrdiff_t>(pos));
  };

  while (active.size() > 1) {
    const std::size_t ms = active.size();

    // pairwise differentials and their bootstrap variances
    bool dominance = false;
    double t_sq = 0.0;
    Eigen::MatrixXd var_lk = Eigen::MatrixXd::Zero(
        static_cast<Eigen::Index>(ms), static_cast<Eigen::Index>(ms));
    for (std::size_t a = 0; a < ms && !dominance; ++a) {
      for (std::size_t b = a + 1; b < ms; ++b) {
        const Eigen::Index ca = static_cast<Eigen::Index>(active[a]);
        const Eigen::Index cb = static_cast<Eigen::Index>(active[b]);
        const double d_bar = full_mean(ca) - full_mean(cb);
        const Eigen::ArrayXd d_boot =
            (boot_mean.col(ca) - boot_mean.col(cb)).array() - d_bar;
        const double v = d_boot.square().mean();
        var_lk(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) = v;
        if (v <= 0.0) {
          if (d_bar != 0.0) {
            // pure dominance: the ordering is certain, no t-statistic needed
            eliminate(d_bar > 0.0 ? a : b, 0.0);
            dominance = true;
            break;
          }
          continue;  // identical columns: equal models, no contribution
        }
        t_sq += d_bar * d_bar / v;
      }
    }
    if (dominance) continue;
    if (t_sq == 0.0) break;  // all remaining models are loss-identical

    // bootstrap distribution of the recentred statistic
    std::size_t exceed = 0;
    for (std::size_t b = 0; b < b_reps; ++b) {
      double t_star = 0.0;
      for (std::size_t a2 = 0; a2 < ms; ++a2)
        for (std::size_t b2 = a2 + 1; b2 < ms; ++b2) {
          const double v = var_lk(static_cast<Eigen::Index>(a2),
                                  static_cast<Eigen::Index>(b2));
          if (v <= 0.0) continue;
          const Eigen::Index ca = static_cast<Eigen::Index>(active[a2]);
          const Eigen::Index cb = static_cast<Eigen::Index>(active[b2]);
          const double d_bar = full_mean(ca) - full_mean(cb);
          const double d_star = boot_mean(static_cast<Eigen::Index>(b), ca) -
                                boot_mean(static_cast<Eigen::Index>(b), cb) -
                                d_bar;
          t_star += d_star * d_star / v;
        }
      if (t_star >= t_sq) ++exceed;
    }
    const double p_raw =
        static_cast<double>(exceed) / static_cast<double>(b_reps);

    // max-t elimination against the set average
    std::size_t worst = 0;
    double worst_t = -1.0;
    for (std::size_t a = 0; a < ms; ++a) {
      const Eigen::Index ca = static_cast<Eigen::Index>(active[a]);
      double d_dot = 0.0;
      Eigen::ArrayXd d_dot_boot = Eigen::ArrayXd::Zero(
          static_cast<Eigen::Index>(b_reps));
      for (std::size_t k = 0; k < ms; ++k) {
        if (k == a) continue;
        const Eigen::Index ck = static_cast<Eigen::Index>(active[k]);
        d_dot += (full_mean(ca) - full_mean(ck));
        d_dot_boot += (boot_mean.col(ca) - boot_mean.col(ck)).array();
      }
      d_dot /= static_cast<double>(ms - 1);
      d_dot_boot /= static_cast<double>(ms - 1);
      const double v = (d_dot_boot - d_dot).square().mean();
      const double t = v > 0.0
                           ? d_dot / std::sqrt(v)
                           : (d_dot > 0.0 ? std::numeric_limits<double>::infinity()
                                          : -std::numeric_limits<double>::infinity());
      if (t > worst_t) {
        worst_t = t;
        worst = a;
      }
    }
    eliminate(worst, p_raw);
  }

  // running-maximum p-values; whatever remains survives with p = 1
  double run_max = 0.0;
  for (auto& [name, p] : raw_elims) {
    run_max = std::max(run_max, p);
    report.elimination_order.emplace_back(name, run_max);
  }
  std::vector<std::pair<double, std::string>> rest;
  for (std::size_t idx : active)
    rest.emplace_back(full_mean(static_cast<Eigen::Index>(idx)),
                      panel.models[idx]);
  std::sort(rest.begin(), rest.end(),
            [](const auto& x, const auto& y) { return x.first > y.first; });
  for (const auto& entry : rest)
    report.elimination_order.emplace_back(entry.second, 1.0);

  std::vector<double> levels{0.75, 0.90};
  if (std::find(levels.begin(), levels.end(), 1.0 - delta) == levels.end())
    levels.push_back(1.0 - delta);
  for (double level : levels) {
    std::vector<std::string> surv;
    for (const auto& [name, p] : report.elimination_order)
      if (p >= (1.0 - level) - 1e-12) surv.push_back(name);
    // keep the original column order for readability
    std::vector<std::string> ordered;
    for (const auto& name : panel.models)
      if (std::find(surv.begin(), surv.end(), name) != surv.end())
        ordered.push_back(name);
    report.survivors[level] = std::move(ordered);
  }
  return report;
}

}  // namespace mfq
