#pragma once

// CAViaR quantile recursions (symmetric absolute value, asymmetric slope,
// indirect GARCH) fitted by multi-start simplex search.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

#include <Eigen/Dense>

#include "mfqvar/errors.hpp"
#include "mfqvar/optim.hpp"
#include "mfqvar/qreg.hpp"
#include "mfqvar/rng.hpp"
#include "mfqvar/stats.hpp"

namespace mfq {

enum class CaviarVariant { sav, as, ig };

inline std::size_t caviar_n_params(CaviarVariant v) {
  return v == CaviarVariant::as ? 4 : 3;
}

struct CaviarModel {
  CaviarVariant variant = CaviarVariant::sav;
  Eigen::VectorXd betas;
  double tau = 0.0;
  double loss = 0.0;  // attained check loss over the scored observations
  bool converged = false;
  std::size_t n_obs = 0;
};

struct CaviarOptions {
  int n_starts = 10000;   // uniform candidate draws
  int n_refine = 10;      // best candidates passed to the simplex
  std::uint64_t seed = 20240;
  int max_eval = 3000;
};

namespace caviar_detail {

inline double init_quantile(const std::vector<double>& r, double tau) {
  const std::size_t m = std::min<std::size_t>(r.size(), 100);
  std::vector<double> head(r.begin(), r.begin() + static_cast<std::ptrdiff_t>(m));
  return empirical_quantile(head, tau);
}

}  // namespace caviar_detail

/// Filters the VaR recursion; out[t] is the VaR applying to observation t and
/// out[n] is the one-step-ahead forecast. Returns false (leaving the tail
/// unspecified) when an indirect-GARCH square-root argument turns non-positive.
inline bool caviar_var_path(CaviarVariant variant, const Eigen::VectorXd& betas,
                            const std::vector<double>& returns, double tau,
                            std::vector<double>& out) {
  const std::size_t n = returns.size();
  out.resize(n + 1);
  out[0] = caviar_detail::init_quantile(returns, tau);
  for (std::size_t t = 1; t <= n; ++t) {
    const double r = returns[t - 1];
    const double v = out[t - 1];
    switch (variant) {
      case CaviarVariant::sav:
        out[t] = betas(0) + betas(1) * v + betas(2) * std::abs(r);
        break;
      case CaviarVariant::as: {
        const double slope = r > 0.0 ? betas(2) : (r < 0.0 ? betas(3) : 0.0);
        out[t] = betas(0) + betas(1) * v + slope * std::abs(r);
        break;
      }
      case CaviarVariant::ig: {
        const double arg = betas(0) + betas(1) * v * v + betas(2) * r * r;
        if (!(arg > 0.0)) return false;
        out[t] = -std::sqrt(arg);
        break;
      }
    }
  }
  return true;
}

/// Check loss of the recursion over observations 1..n-1 (observation 0 only
/// seeds the recursion). +inf marks an inadmissible candidate.
inline double caviar_objective(CaviarVariant variant, const Eigen::VectorXd& betas,
                               const std::vector<double>& returns, double tau,
                               std::vector<double>& path) {
  if (!caviar_var_path(variant, betas, returns, tau, path))
    return std::numeric_limits<double>::infinity();
  double acc = 0.0;
  for (std::size_t t = 1; t < returns.size(); ++t)
    acc += check_loss(returns[t] - path[t], tau);
  return std::isfinite(acc) ? acc : std::numeric_limits<double>::infinity();
}

inline CaviarModel fit_caviar(const std::vector<double>& returns, double tau,
                              CaviarVariant variant,
                              const CaviarOptions& opt = {}) {
  if (!(tau > 0.0 && tau < 1.0))
    throw ConfigError("fit_caviar: tau must lie in (0, 1)");
  if (returns.size() < 300)
    throw DataError("fit_caviar: need at least 300 observations");
  for (double r : returns)
    if (!std::isfinite(r)) throw DataError("fit_caviar: non-finite return");

  const std::size_t p = caviar_n_params(variant);
  Rng rng(opt.seed);
  std::vector<double> path;

  auto objective = [&](const Eigen::VectorXd& b) {
    return caviar_objective(variant, b, returns, tau, path);
  };

  // uniform candidate sweep
  std::vector<std::pair<double, Eigen::VectorXd>> pool;
  pool.reserve(static_cast<std::size_t>(opt.n_starts));
  for (int s = 0; s < opt.n_starts; ++s) {
    Eigen::VectorXd b(static_cast<Eigen::Index>(p));
    if (variant == CaviarVariant::ig) {
      b(0) = rng.uniform(0.0, 1.0);
      b(1) = rng.uniform(0.0, 1.0);
      b(2) = rng.uniform(0.0, 1.0);
    } else {
      b(0) = rng.uniform(-1.0, 0.5);
      b(1) = rng.uniform(0.0, 1.0);
      for (Eigen::Index j = 2; j < b.size(); ++j) b(j) = rng.uniform(-1.0, 0.5);
    }
    const double f = objective(b);
    if (std::isfinite(f)) pool.emplace_back(f, std::move(b));
  }
  std::sort(pool.begin(), pool.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  if (pool.size() > static_cast<std::size_t>(opt.n_refine))
    pool.resize(static_cast<std::size_t>(opt.n_refine));

  // the recursion nests a constant; seed the refinement with the exact
  // intercept-only optimum over the scored observations, which is the order
  // statistic at ceil(n*tau)
  {
    std::vector<double> scored(returns.begin() + 1, returns.end());
    std::sort(scored.begin(), scored.end());
    const std::size_t k = std::max<std::size_t>(
        1, static_cast<std::size_t>(
               std::ceil(tau * static_cast<double>(scored.size()))));
    const double q = scored[std::min(k, scored.size()) - 1];
    Eigen::VectorXd b = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(p));
    b(0) = variant == CaviarVariant::ig ? q * q : q;
    pool.emplace_back(objective(b), b);
  }

  CaviarModel model;
  model.variant = variant;
  model.tau = tau;
  model.n_obs = returns.size() - 1;
  model.loss = std::numeric_limits<double>::infinity();
  bool any = false;
  for (const auto& [f0, b0] : pool) {
    if (!std::isfinite(f0)) continue;
    auto r = nelder_mead(objective, b0, 0.05, opt.max_eval, 1e-10);
    const double f = std::isfinite(r.f) ? r.f : f0;
    const Eigen::VectorXd& b = std::isfinite(r.f) ? r.x : b0;
    if (f < model.loss) {
      model.loss = f;
      model.betas = b;
      model.converged = r.converged;
    }
    any = true;
  }
  if (!any || !std::isfinite(model.loss))
    throw EstimationError("fit_caviar: every candidate was inadmissible");
  return model;
}

}  // namespace mfq
