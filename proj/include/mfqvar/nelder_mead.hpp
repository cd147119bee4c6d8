#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <vector>

#include <Eigen/Core>

namespace mfq {

struct NmOptions {
  int max_iter = 4000;       // function evaluations cap
  double f_tol = 1e-10;      // relative spread of simplex values
  double init_step = 0.25;   // initial simplex edge along each axis
};

struct NmResult {
  Eigen::VectorXd x;
  double f = std::numeric_limits<double>::infinity();
  int evals = 0;
  bool converged = false;
};

/// Derivative-free Nelder-Mead simplex minimizer with the classic
/// reflection/expansion/contraction/shrink coefficients (1, 2, 0.5, 0.5).
/// Objectives may return +infinity to reject infeasible points.
template <class F>
NmResult nelder_mead(F&& f, const Eigen::VectorXd& x0, const NmOptions& opt = {}) {
  const int dim = static_cast<int>(x0.size());
  NmResult res;
  res.x = x0;
  if (dim == 0) return res;

  const int n_vert = dim + 1;
  std::vector<Eigen::VectorXd> v(n_vert, x0);
  std::vector<double> fv(n_vert);
  for (int i = 1; i < n_vert; ++i) v[i](i - 1) += opt.init_step;
  for (int i = 0; i < n_vert; ++i) fv[i] = f(v[i]);
  res.evals = n_vert;

  std::vector<int> order(n_vert);
  auto sort_simplex = [&] {
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](int a, int b) { return fv[a] < fv[b]; });
  };

  Eigen::VectorXd centroid(dim), xr(dim), xe(dim), xc(dim);
  while (res.evals < opt.max_iter) {
    sort_simplex();
    const int best = order[0], worst = order[n_vert - 1], second = order[n_vert - 2];
    const double spread = std::abs(fv[worst] - fv[best]);
    if (std::isfinite(fv[best]) && spread <= opt.f_tol * (1.0 + std::abs(fv[best]))) {
      res.converged = true;
      break;
    }

    centroid.setZero();
    for (int i = 0; i < n_vert; ++i)
      if (i != worst) centroid += v[i];
    centroid /= static_cast<double>(dim);

    xr = centroid + (centroid - v[worst]);  // reflection
    const double fr = f(xr);
    ++res.evals;
    if (fr < fv[order[0]]) {
      xe = centroid + 2.0 * (centroid - v[worst]);  // expansion
      const double fe = f(xe);
      ++res.evals;
      if (fe < fr) {
        v[worst] = xe;
        fv[worst] = fe;
      } else {
        v[worst] = xr;
        fv[worst] = fr;
      }
    } else if (fr < fv[second]) {
      v[worst] = xr;
      fv[worst] = fr;
    } else {
      const bool outside = fr < fv[worst];
      xc = outside ? centroid + 0.5 * (xr - centroid)
                   : centroid - 0.5 * (centroid - v[worst]);
      const double fc = f(xc);
      ++res.evals;
      if (fc < (outside ? fr : fv[worst])) {
        v[worst] = xc;
        fv[worst] = fc;
      } else {
        // shrink toward the best vertex
        for (int i = 0; i < n_vert; ++i) {
          if (i == best) continue;
          v[i] = v[best] + 0.5 * (v[i] - v[best]);
          fv[i] = f(v[i]);
          ++res.evals;
        }
      }
    }
  }

  sort_simplex();
  res.x = v[order[0]];
  res.f = fv[order[0]];
  return res;
}

}  // namespace mfq
