#pragma once

// Derivative-free simplex minimizer for the low-dimensional likelihood and
// recursion objectives in this library.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <vector>

#include <Eigen/Dense>

namespace mfq {

struct NelderMeadResult {
  Eigen::VectorXd x;
  double f = std::numeric_limits<double>::infinity();
  int n_eval = 0;
  bool converged = false;
};

/// Standard Nelder-Mead with reflection 1, expansion 2, contraction 0.5 and
/// shrink 0.5. Objectives may return +inf to veto a point.
inline NelderMeadResult nelder_mead(
    const std::function<double(const Eigen::VectorXd&)>& fn,
    const Eigen::VectorXd& x0, double step = 0.1, int max_eval = 4000,
    double ftol = 1e-10) {
  const int n = static_cast<int>(x0.size());
  NelderMeadResult res;
  std::vector<Eigen::VectorXd> pts(static_cast<std::size_t>(n) + 1, x0);
  std::vector<double> fv(static_cast<std::size_t>(n) + 1);
  for (int i = 0; i < n; ++i) {
    double d = step * std::max(1.0, std::abs(x0(i)));
    pts[static_cast<std::size_t>(i) + 1](i) += d;
  }
  for (std::size_t i = 0; i < pts.size(); ++i) fv[i] = fn(pts[i]);
  res.n_eval = n + 1;

  std::vector<std::size_t> ord(pts.size());
  while (res.n_eval < max_eval) {
    std::iota(ord.begin(), ord.end(), 0);
    std::sort(ord.begin(), ord.end(),
              [&](std::size_t a, std::size_t b) { return fv[a] < fv[b]; });
    const std::size_t best = ord.front(), worst = ord.back();
    const std::size_t second = ord[ord.size() - 2];
    if (std::isfinite(fv[best]) &&
        fv[worst] - fv[best] <= ftol * (1.0 + std::abs(fv[best]))) {
      res.converged = true;
      break;
    }

    Eigen::VectorXd centroid = Eigen::VectorXd::Zero(n);
    for (std::size_t i : ord)
      if (i != worst) centroid += pts[i];
    centroid /= static_cast<double>(n);

    Eigen::VectorXd xr = centroid + (centroid - pts[worst]);
    double fr = fn(xr);
    ++res.n_eval;
    if (fr < fv[ord[0]]) {
      Eigen::VectorXd xe = centroid + 2.0 * (centroid - pts[worst]);
      double fe = fn(xe);
      ++res.n_eval;
      if (fe < fr) {
        pts[worst] = xe;
        fv[worst] = fe;
      } else {
        pts[worst] = xr;
        fv[worst] = fr;
      }
    } else if (fr < fv[second]) {
      pts[worst] = xr;
      fv[worst] = fr;
    } else {
      const bool outside = fr < fv[worst];
      Eigen::VectorXd xc;
      if (outside)
        xc = centroid + 0.5 * (xr - centroid);
      else
        xc = centroid - 0.5 * (centroid - pts[worst]);
      double fc = fn(xc);
      ++res.n_eval;
      if (fc < (outside ? fr : fv[worst])) {
        pts[worst] = xc;
        fv[worst] = fc;
      } else {
        for (std::size_t i : ord) {
          if (i == best) continue;
          pts[i] = pts[best] + 0.5 * (pts[i] - pts[best]);
          fv[i] = fn(pts[i]);
          ++res.n_eval;
        }
      }
    }
  }
  std::size_t arg = 0;
  for (std::size_t i = 1; i < fv.size(); ++i)
    if (fv[i] < fv[arg]) arg = i;
  res.x = pts[arg];
  res.f = fv[arg];
  return res;
}

}  // namespace mfq
