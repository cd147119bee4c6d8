#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <vector>

#include "mfqvar/errors.hpp"
#include "mfqvar/timegrid.hpp"

namespace mfq {

/// Normalized Beta lag polynomial over k = 1..K.
struct BetaWeights {
  int k_max = 0;
  double omega1 = 1.0;
  double omega2 = 1.0;
  std::vector<double> weights;  // weights[k-1] multiplies lag k
};

/// weights[k] proportional to (k/K)^(w1-1) * (1-k/K)^(w2-1), normalized to
/// sum 1. Computed in log space so large omega2 cannot underflow the whole
/// set. Conventions: 0^0 = 1, and the k = K weight is exactly 0 when
/// omega2 > 1 (the (1-K/K) factor).
inline BetaWeights beta_weights(int k_max, double omega1, double omega2) {
  if (k_max < 1) throw ConfigError("beta_weights: k_max must be >= 1");
  if (!(omega1 >= 1.0) || !std::isfinite(omega1))
    throw ConfigError("beta_weights: omega1 must be >= 1");
  if (!(omega2 >= 1.0) || !std::isfinite(omega2))
    throw ConfigError("beta_weights: omega2 must be >= 1");

  BetaWeights bw;
  bw.k_max = k_max;
  bw.omega1 = omega1;
  bw.omega2 = omega2;
  bw.weights.assign(static_cast<std::size_t>(k_max), 0.0);
  if (k_max == 1) {
    bw.weights[0] = 1.0;
    return bw;
  }

  const double K = static_cast<double>(k_max);
  std::vector<double> logs(static_cast<std::size_t>(k_max));
  double max_log = -std::numeric_limits<double>::infinity();
  for (int k = 1; k <= k_max; ++k) {
    const double a = static_cast<double>(k) / K;
    const double b = 1.0 - a;
    double lg;
    if (b == 0.0) {
      // last lag: zero weight unless the exponent vanishes
      lg = (omega2 > 1.0) ? -std::numeric_limits<double>::infinity() : 0.0;
      if (omega1 > 1.0) lg += (omega1 - 1.0) * std::log(a);
    } else {
      lg = (omega1 - 1.0) * std::log(a) + (omega2 - 1.0) * std::log(b);
    }
    logs[static_cast<std::size_t>(k - 1)] = lg;
    if (lg > max_log) max_log = lg;
  }
  if (!std::isfinite(max_log))
    throw EstimationError("beta_weights: all-zero numerator set");
  double total = 0.0;
  for (int k = 0; k < k_max; ++k) {
    const double w = std::isfinite(logs[static_cast<std::size_t>(k)])
                         ? std::exp(logs[static_cast<std::size_t>(k)] - max_log)
                         : 0.0;
    bw.weights[static_cast<std::size_t>(k)] = w;
    total += w;
  }
  for (double& w : bw.weights) w /= total;
  return bw;
}

/// WS value at month position t: sum_k w_k * MV_{t-k}. The caller applies the
/// absolute value where the model demands it.
inline double weighted_sum(const MixedFreqPanel& panel, int t, const BetaWeights& w) {
  if (t < w.k_max)
    throw InsufficientHistoryError("weighted_sum: month position lacks k_max prior months");
  if (t > static_cast<int>(panel.n_monthly()))
    throw InsufficientHistoryError("weighted_sum: month position beyond monthly series");
  double s = 0.0;
  for (int k = 1; k <= w.k_max; ++k)
    s += w.weights[static_cast<std::size_t>(k - 1)] * panel.mv[static_cast<std::size_t>(t - k)];
  return s;
}

}  // namespace mfq
