#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <numeric>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Core>
#include <Eigen/LU>

#include "mfqvar/errors.hpp"
#include "mfqvar/stats.hpp"

namespace mfq {

/// rho_tau(u) = u * (tau - 1(u < 0)).
inline double check_loss(double u, double tau) {
  return u >= 0.0 ? u * tau : u * (tau - 1.0);
}

inline double check_loss_sum(const Eigen::VectorXd& u, double tau) {
  double s = 0.0;
  for (Eigen::Index i = 0; i < u.size(); ++i) s += check_loss(u(i), tau);
  return s;
}

struct QuantileFit {
  double tau = 0.0;
  Eigen::VectorXd theta;
  double loss = 0.0;       // attained check-loss sum V(tau)
  std::size_t n_obs = 0;
  bool converged = false;
};

struct QregOptions {
  double gap_tol = 1e-8;   // duality gap tolerance
  int max_iter = 200;
};

namespace qreg_detail {

/// Frisch-Newton interior point for the quantile LP in its bounded dual form:
/// max y'a  s.t.  X'a = (1-tau) X'1,  a in [0,1]^n, solved with a Mehrotra
/// predictor-corrector. The equality multipliers converge to -theta.
/// Buffers are reusable across calls of identical shape (profiling loop).
class FrischNewton {
 public:
  void resize(Eigen::Index n, Eigen::Index p) {
    if (n == n_ && p == p_) return;
    n_ = n;
    p_ = p;
    a_.resize(n);
    s_.resize(n);
    z_.resize(n);
    w_.resize(n);
    r_.resize(n);
    d_.resize(n);
    tmp_n_.resize(n);
    da_.resize(n);
    ds_.resize(n);
    dz_.resize(n);
    dw_.resize(n);
    da_aff_.resize(n);
    ds_aff_.resize(n);
    dz_aff_.resize(n);
    dw_aff_.resize(n);
    weighted_x_.resize(n, p);
    m_.resize(p, p);
    ydual_.resize(p);
    dy_.resize(p);
    rhs_p_.resize(p);
  }

  /// Returns true if the duality gap tolerance was met. `theta` receives the
  /// primal coefficient estimate in any case.
  bool solve(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, double tau,
             const QregOptions& opt, Eigen::VectorXd& theta) {
    const Eigen::Index n = x.rows(), p = x.cols();
    resize(n, p);

    // Gram matrix once: rank check and least-squares warm start.
    m_.noalias() = x.transpose() * x;
    Eigen::LDLT<Eigen::MatrixXd> ldlt(m_);
    const Eigen::VectorXd dvec = ldlt.vectorD();
    const double dmax = dvec.maxCoeff();
    if (!(dmax > 0.0) || dvec.minCoeff() <= dmax * 1e-12)
      throw SingularDesignError("qreg: design matrix numerically rank deficient");

    ydual_ = -ldlt.solve(x.transpose() * y);  // so that c - X ydual = -ols residuals
    r_ = (-y - x * ydual_).array();           // dual slack target z - w
    const double eps0 = std::max(1e-10, 1e-5 * (1.0 + r_.abs().mean()));
    z_ = r_.max(0.0) + eps0;
    w_ = (-r_).max(0.0) + eps0;
    a_.setConstant(1.0 - tau);
    s_.setConstant(tau);

    double gap = dot(a_, z_) + dot(s_, w_);
    const double big = std::numeric_limits<double>::infinity();
    bool ok = false;
    for (int it = 0; it < opt.max_iter; ++it) {
      if (gap <= opt.gap_tol) {
        ok = true;
        break;
      }
      d_ = 1.0 / (z_ / a_ + w_ / s_);
      r_ = z_ - w_;

      weighted_x_ = x.array().colwise() * d_;
      m_.noalias() = x.transpose() * weighted_x_.matrix();
      Eigen::LDLT<Eigen::MatrixXd> step_ldlt(m_);
      if (step_ldlt.info() != Eigen::Success) break;

      // affine (predictor) direction
      tmp_n_ = d_ * r_;
      rhs_p_.noalias() = x.transpose() * tmp_n_.matrix();
      dy_ = step_ldlt.solve(rhs_p_);
      da_aff_ = d_ * (x * dy_).array() - tmp_n_;
      ds_aff_ = -da_aff_;
      dz_aff_ = -z_ - (z_ / a_) * da_aff_;
      dw_aff_ = -w_ + (w_ / s_) * da_aff_;

      const double ap_aff = step_length(a_, da_aff_, s_, ds_aff_);
      const double ad_aff = step_length(z_, dz_aff_, w_, dw_aff_);
      const double gap_aff = dot(a_ + ap_aff * da_aff_, z_ + ad_aff * dz_aff_) +
                             dot(s_ + ap_aff * ds_aff_, w_ + ad_aff * dw_aff_);
      const double ratio = gap_aff / gap;
      const double mu = ratio * ratio * gap_aff / (2.0 * static_cast<double>(n));

      // corrector direction
      tmp_n_ = r_ - mu * (1.0 / a_ - 1.0 / s_) + (da_aff_ * dz_aff_) / a_ -
               (ds_aff_ * dw_aff_) / s_;
      da_ = d_ * tmp_n_;
      rhs_p_.noalias() = x.transpose() * da_.matrix();
      dy_ = step_ldlt.solve(rhs_p_);
      da_ = d_ * (x * dy_).array() - da_;
      ds_ = -da_;
      dz_ = (mu - da_aff_ * dz_aff_) / a_ - z_ - (z_ / a_) * da_;
      dw_ = (mu - ds_aff_ * dw_aff_) / s_ - w_ + (w_ / s_) * da_;

      const double ap = step_length(a_, da_, s_, ds_);
      const double ad = step_length(z_, dz_, w_, dw_);
      if (ap <= 0.0 || ad <= 0.0) break;
      a_ += ap * da_;
      s_ += ap * ds_;
      ydual_ += ad * dy_;
      z_ += ad * dz_;
      w_ += ad * dw_;

      const double new_gap = dot(a_, z_) + dot(s_, w_);
      if (!std::isfinite(new_gap) || new_gap >= big) break;
      gap = new_gap;
    }
    if (!ok && gap <= opt.gap_tol) ok = true;
    theta = -ydual_;
    return ok;
  }

 private:
  static double dot(const Eigen::ArrayXd& u, const Eigen::ArrayXd& v) {
    return (u * v).sum();
  }

  /// Largest alpha <= 1 with 0.9995 backoff keeping both arrays positive.
  static double step_length(const Eigen::ArrayXd& v1, const Eigen::ArrayXd& d1,
                            const Eigen::ArrayXd& v2, const Eigen::ArrayXd& d2) {
    double worst = 0.0;
    for (Eigen::Index i = 0; i < v1.size(); ++i) {
      if (d1(i) < 0.0) worst = std::max(worst, -d1(i) / v1(i));
      if (d2(i) < 0.0) worst = std::max(worst, -d2(i) / v2(i));
    }
    if (worst <= 0.0) return 1.0;
    return std::min(1.0, 0.9995 / worst);
  }

  Eigen::Index n_ = 0, p_ = 0;
  Eigen::ArrayXd a_, s_, z_, w_, r_, d_, tmp_n_;
  Eigen::ArrayXd da_, ds_, dz_, dw_, da_aff_, ds_aff_, dz_aff_, dw_aff_;
  Eigen::ArrayXXd weighted_x_;
  Eigen::MatrixXd m_;
  Eigen::VectorXd ydual_, dy_, rhs_p_;
};

/// Vertex polish: re-solve on the p smallest-residual rows. A quantile-LP
/// optimum interpolates at most p observations, so if the active set is
/// identified the polished solution is exact. Kept only when it does not
/// increase the loss.
inline void polish_vertex(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                          double tau, Eigen::VectorXd& theta, double& loss) {
  const Eigen::Index n = x.rows(), p = x.cols();
  Eigen::VectorXd resid = y - x * theta;
  std::vector<Eigen::Index> idx(static_cast<std::size_t>(n));
  std::iota(idx.begin(), idx.end(), 0);
  std::partial_sort(idx.begin(), idx.begin() + p, idx.end(),
                    [&](Eigen::Index a, Eigen::Index b) {
                      return std::abs(resid(a)) < std::abs(resid(b));
                    });
  Eigen::MatrixXd xb(p, p);
  Eigen::VectorXd yb(p);
  for (Eigen::Index k = 0; k < p; ++k) {
    xb.row(k) = x.row(idx[static_cast<std::size_t>(k)]);
    yb(k) = y(idx[static_cast<std::size_t>(k)]);
  }
  Eigen::FullPivLU<Eigen::MatrixXd> lu(xb);
  if (!lu.isInvertible()) return;
  Eigen::VectorXd cand = lu.solve(yb);
  const double cand_loss = check_loss_sum(y - x * cand, tau);
  if (cand_loss <= loss) {
    theta = cand;
    loss = cand_loss;
  }
}

/// Smoothed check loss sum_i [tau u_i + h softplus(-u_i / h)], computed with
/// the overflow-safe softplus split.
inline double smoothed_loss(const Eigen::ArrayXd& u, double tau, double h) {
  double s = 0.0;
  for (Eigen::Index i = 0; i < u.size(); ++i) {
    const double v = -u(i) / h;
    const double sp = v > 0.0 ? v + std::log1p(std::exp(-v)) : std::log1p(std::exp(v));
    s += tau * u(i) + h * sp;
  }
  return s;
}

/// Smoothed-objective fallback: damped Newton on the logistic-smoothed check
/// loss with a decreasing smoothing parameter. Used only when the interior
/// point fails to reach its gap tolerance.
inline void smoothed_fallback(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                              double tau, Eigen::VectorXd& theta) {
  const double scale = std::max(1e-8, y.cwiseAbs().mean());
  for (double h = 1e-2 * scale; h >= 1e-7 * scale; h *= 0.1) {
    for (int it = 0; it < 30; ++it) {
      Eigen::ArrayXd u = (y - x * theta).array();
      Eigen::ArrayXd sig = 1.0 / (1.0 + (u / h).exp());  // logistic(-u/h)
      Eigen::VectorXd grad = -(x.transpose() * (tau - sig).matrix());
      Eigen::ArrayXd wgt = sig * (1.0 - sig) / h;
      Eigen::MatrixXd hess = x.transpose() * (x.array().colwise() * wgt).matrix();
      hess.diagonal().array() += 1e-10 * (1.0 + hess.diagonal().maxCoeff());
      Eigen::VectorXd step = hess.ldlt().solve(-grad);
      if (!step.allFinite()) return;
      // backtrack until the smoothed objective decreases
      const double f0 = smoothed_loss(u, tau, h);
      double lambda = 1.0;
      bool moved = false;
      for (int bt = 0; bt < 40; ++bt) {
        Eigen::VectorXd cand = theta + lambda * step;
        const double f1 = smoothed_loss((y - x * cand).array(), tau, h);
        if (std::isfinite(f1) && f1 <= f0) {
          theta = cand;
          moved = f1 < f0 - 1e-14 * (1.0 + std::abs(f0));
          break;
        }
        lambda *= 0.5;
      }
      if (!moved) break;
      if (lambda * step.cwiseAbs().maxCoeff() <=
          1e-12 * (1.0 + theta.cwiseAbs().maxCoeff()))
        break;
    }
  }
}

}  // namespace qreg_detail

/// Exact LP optimality check: per coordinate, the subgradient contribution of
/// nonzero residuals must lie in the interval spanned by the zero-residual
/// terms.
struct SubgradientCheck {
  bool ok = false;
  double margin = 0.0;  // worst coordinate violation, 0 when ok
};

inline SubgradientCheck subgradient_certificate(const Eigen::MatrixXd& x,
                                                const Eigen::VectorXd& y,
                                                double tau,
                                                const Eigen::VectorXd& theta,
                                                double zero_tol = 1e-6) {
  const Eigen::Index n = x.rows(), p = x.cols();
  Eigen::VectorXd resid = y - x * theta;
  const double tol = zero_tol * std::max(1.0, resid.cwiseAbs().maxCoeff());
  SubgradientCheck out;
  out.ok = true;
  for (Eigen::Index j = 0; j < p; ++j) {
    double fixed = 0.0, lo = 0.0, hi = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      const double xij = x(i, j);
      if (std::abs(resid(i)) > tol) {
        fixed += xij * (tau - (resid(i) < 0.0 ? 1.0 : 0.0));
      } else {
        // zero residual: contribution ranges over [tau-1, tau] * x_ij
        const double c1 = (tau - 1.0) * xij, c2 = tau * xij;
        lo += std::min(c1, c2);
        hi += std::max(c1, c2);
      }
    }
    // optimality: some g_i in [tau-1, tau] at the zero rows must balance the
    // fixed part, i.e. -fixed must land inside [lo, hi]
    const double slack = 1e-7 * std::max(1.0, x.col(j).cwiseAbs().sum());
    const double viol = std::max({-fixed - (hi + slack), (lo - slack) - (-fixed), 0.0});
    if (viol > 0.0) {
      out.ok = false;
      out.margin = std::max(out.margin, viol);
    }
  }
  return out;
}

namespace qreg_detail {

inline QuantileFit fit_with(FrischNewton& solver, const Eigen::MatrixXd& x,
                            const Eigen::VectorXd& y, double tau,
                            const QregOptions& opt) {
  if (!(tau > 0.0 && tau < 1.0)) throw ConfigError("qreg::fit: tau must be in (0,1)");
  const Eigen::Index n = x.rows(), p = x.cols();
  if (n != y.size()) throw DataError("qreg::fit: x and y dimension mismatch");
  if (n <= p) throw DataError("qreg::fit: need n > p observations");
  if (!x.allFinite() || !y.allFinite())
    throw DataError("qreg::fit: non-finite entries in the design or response");

  QuantileFit out;
  out.tau = tau;
  out.n_obs = static_cast<std::size_t>(n);
  bool ok = solver.solve(x, y, tau, opt, out.theta);
  out.loss = check_loss_sum(y - x * out.theta, tau);
  polish_vertex(x, y, tau, out.theta, out.loss);
  if (!ok) {
    Eigen::VectorXd alt = out.theta;
    smoothed_fallback(x, y, tau, alt);
    double alt_loss = check_loss_sum(y - x * alt, tau);
    polish_vertex(x, y, tau, alt, alt_loss);
    if (alt_loss < out.loss) {
      out.theta = alt;
      out.loss = alt_loss;
    }
    ok = subgradient_certificate(x, y, tau, out.theta).ok;
  }
  out.converged = ok;
  return out;
}

}  // namespace qreg_detail

/// Minimizes sum_i rho_tau(y_i - x_i'theta). Interior point with a vertex
/// polish; if the duality-gap tolerance is not met within the iteration cap, a
/// smoothed Newton fallback runs and converged reflects the optimality
/// certificate instead.
inline QuantileFit fit(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                       double tau, const QregOptions& opt = {}) {
  qreg_detail::FrischNewton solver;
  return qreg_detail::fit_with(solver, x, y, tau, opt);
}

/// Reusable profiling helper: identical contract to fit() but recycles solver
/// buffers across many same-shape designs.
class QregSolver {
 public:
  QuantileFit run(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, double tau,
                  const QregOptions& opt = {}) {
    return qreg_detail::fit_with(fn_, x, y, tau, opt);
  }

 private:
  qreg_detail::FrischNewton fn_;
};

/// Hall-Sheather bandwidth at significance 0.05.
inline double hall_sheather_bandwidth(double tau, std::size_t n) {
  const double z = norm_quantile(1.0 - 0.05 / 2.0);
  const double q = norm_quantile(tau);
  const double f = norm_pdf(q);
  const double core = 1.5 * f * f / (2.0 * q * q + 1.0);
  return std::pow(static_cast<double>(n), -1.0 / 3.0) * std::pow(z, 2.0 / 3.0) *
         std::cbrt(core);
}

/// Siddiqui difference quotient s(tau) = [Q(tau+h) - Q(tau-h)] / (2h) with the
/// Hall-Sheather bandwidth; the window is clamped into (1/n, 1-1/n) and the
/// quotient taken over the clamped width.
inline double sparsity(const std::function<double(double)>& residual_quantile_fn,
                       double tau, std::size_t n) {
  if (!(tau > 0.0 && tau < 1.0)) throw ConfigError("sparsity: tau must be in (0,1)");
  if (n < 3) throw DataError("sparsity: sample too small");
  const double h = hall_sheather_bandwidth(tau, n);
  const double eps = 1.0 / static_cast<double>(n);
  double lo = std::max(tau - h, eps);
  double hi = std::min(tau + h, 1.0 - eps);
  if (!(hi > lo)) throw ZeroSparsityError("sparsity: degenerate clamped window");
  const double s = (residual_quantile_fn(hi) - residual_quantile_fn(lo)) / (hi - lo);
  if (!(s > 0.0))
    throw ZeroSparsityError("sparsity: non-positive difference quotient (degenerate residuals)");
  return s;
}

struct LrTestResult {
  double statistic = 0.0;
  int df = 1;
  double p_value = 1.0;
  double sparsity = 0.0;
  double v_restricted = 0.0;
  double v_unrestricted = 0.0;
  bool clamped = false;  // true when V_R < V_U by solver noise
};

/// Quantile LR test for one extra coefficient:
/// LR = 2 (V_R - V_U) / (tau (1-tau) s(tau)), asymptotically chi-square(1).
inline LrTestResult lr_test(const QuantileFit& restricted,
                            const QuantileFit& unrestricted, double sparsity_val) {
  if (restricted.tau != unrestricted.tau)
    throw IncompatibilityError("lr_test: fits disagree on tau");
  if (restricted.n_obs != unrestricted.n_obs)
    throw IncompatibilityError("lr_test: fits disagree on the sample");
  if (restricted.theta.size() + 1 != unrestricted.theta.size())
    throw IncompatibilityError("lr_test: models not nested by one coefficient");
  if (!(sparsity_val > 0.0)) throw ZeroSparsityError("lr_test: sparsity must be positive");

  LrTestResult out;
  out.sparsity = sparsity_val;
  out.v_restricted = restricted.loss;
  out.v_unrestricted = unrestricted.loss;
  const double tau = restricted.tau;
  double stat = 2.0 * (restricted.loss - unrestricted.loss) /
                (tau * (1.0 - tau) * sparsity_val);
  if (stat < 0.0) {
    stat = 0.0;
    out.clamped = true;
  }
  out.statistic = stat;
  out.p_value = chi2_sf(stat, 1.0);
  return out;
}

}  // namespace mfq
