// Acceptance gate: nine end-to-end checks on the assembled library, each
// printing one "ACCEPTANCE n: PASS/FAIL" verdict. Tolerances are pinned as
// named constants next to the check they guard. Everything is seeded, so a
// rerun reproduces the verdicts bit for bit.

#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <string>
#include <vector>

#include "mfqvar/cli.hpp"

namespace {

void verdict(int n, bool ok) {
  std::printf("ACCEPTANCE %d: %s\n", n, ok ? "PASS" : "FAIL");
  std::fflush(stdout);
}

std::vector<mfq::Date> dates_for(std::size_t n) {
  std::vector<mfq::Date> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t m = i / 20;
    out.push_back(mfq::Date{2000 + static_cast<int>(m / 12),
                            1 + static_cast<int>(m % 12),
                            1 + static_cast<int>(i % 20)});
  }
  return out;
}

// Parameter recovery studies shared by criteria 1 and 3: R=500 replicates at
// three sample sizes, certificates switched on for every fit.
const std::vector<mfq::McStudyResult>& recovery_studies() {
  static const std::vector<mfq::McStudyResult> studies = [] {
    std::vector<mfq::McStudyResult> out;
    for (const std::size_t n : {1250u, 2500u, 5000u}) {
      mfq::DgpConfig dgp;
      dgp.n_daily = n;
      dgp.seed = 21;
      mfq::McOptions opt;
      opt.do_recovery = true;
      opt.certify = true;
      out.push_back(mfq::run_mc_study(dgp, 500, {0.05}, 1, opt)[0]);
    }
    return out;
  }();
  return studies;
}

}  // namespace

TEST_CASE("criterion 1: Monte Carlo parameter recovery", "[acceptance][c1]") {
  // Reference means at N=2500, tau=0.05, for the six rescaled structural
  // estimates in estimate order: gamma0, theta, gamma1..gamma4. The profiled
  // weight parameter omega2 is a nuisance with no rescaling step; it is held
  // to the MSE-consistency check below and reported alongside.
  const std::vector<double> reference = {0.057, 0.125, 0.297,
                                         0.246, 0.196, 0.148};
  const std::vector<Eigen::Index> structural = {0, 1, 3, 4, 5, 6};
  const double mean_tol = 0.03;

  const auto& studies = recovery_studies();
  const auto& s1250 = studies[0];
  const auto& s2500 = studies[1];
  const auto& s5000 = studies[2];

  bool ok = true;
  REQUIRE(s2500.names.size() == 7);
  for (std::size_t c = 0; c < structural.size(); ++c) {
    const Eigen::Index ci = structural[c];
    const double dev = std::abs(s2500.mean(ci) - reference[c]);
    std::printf("  %-7s mean %.4f (reference %.3f, dev %.4f)\n",
                s2500.names[static_cast<std::size_t>(ci)].c_str(),
                s2500.mean(ci), reference[c], dev);
    if (!(dev <= mean_tol)) ok = false;
  }

  // MSE shrinks with the sample for every estimated quantity, omega2 included.
  for (Eigen::Index ci = 0; ci < 7; ++ci) {
    std::printf("  %-7s mse %.4f -> %.4f\n",
                s2500.names[static_cast<std::size_t>(ci)].c_str(),
                s1250.mse(ci), s5000.mse(ci));
    if (!(s5000.mse(ci) < s1250.mse(ci))) ok = false;
  }

  // Nuisance recovery report: mean, median, and how many replicates landed on
  // the top of the omega2 grid (flat profiles pick the boundary occasionally
  // at small N, which moves the mean but not the median).
  const double grid_top = mfq::default_omega2_grid().back();
  for (const auto* s : {&s1250, &s2500, &s5000}) {
    std::vector<double> w2;
    int edge = 0;
    for (Eigen::Index r = 0; r < s->estimates.rows(); ++r) {
      w2.push_back(s->estimates(r, 2));
      if (s->estimates(r, 2) >= grid_top - 1e-9) ++edge;
    }
    std::sort(w2.begin(), w2.end());
    std::printf("  omega2 n=%zu mean %.4f median %.4f grid-top picks %d/%zu\n",
                s->n_daily, s->mean(2), w2[w2.size() / 2], edge, w2.size());
  }
  std::printf("  omega2 reference means 1.991 / 1.985 / 1.977\n");

  std::printf("  failed replicates: %d/%d/%d\n", s1250.n_failed,
              s2500.n_failed, s5000.n_failed);

  // The recovery targets hold regardless of the skew in the monthly series:
  // rerun the N=2500 study with normal monthly innovations and apply the same
  // band to the structural means.
  mfq::DgpConfig norm_dgp;
  norm_dgp.n_daily = 2500;
  norm_dgp.seed = 21;
  norm_dgp.mv_innovation = mfq::MvInnovation::normal;
  mfq::McOptions norm_opt;
  norm_opt.do_recovery = true;
  const auto norm = mfq::run_mc_study(norm_dgp, 500, {0.05}, 1, norm_opt)[0];
  double worst_norm = 0.0;
  for (std::size_t c = 0; c < structural.size(); ++c) {
    const double dev = std::abs(norm.mean(structural[c]) - reference[c]);
    worst_norm = std::max(worst_norm, dev);
    if (!(dev <= mean_tol)) ok = false;
  }
  std::printf("  normal-innovation rerun: worst structural dev %.4f\n",
              worst_norm);

  verdict(1, ok);
  CHECK(ok);
}

TEST_CASE("criterion 2: sequential test operating characteristics",
          "[acceptance][c2]") {
  mfq::DgpConfig dgp;
  dgp.n_daily = 5000;
  dgp.seed = 22;
  mfq::McOptions opt;
  opt.do_recovery = false;
  opt.do_lagtest = true;
  opt.alpha = 0.05;
  const auto res = mfq::run_mc_study(dgp, 500, {0.05}, 5, opt)[0];

  REQUIRE(res.nonrejection_pct.size() == 5);
  const double lag4 = res.nonrejection_pct[3];  // true coefficient, want rejection
  const double lag5 = res.nonrejection_pct[4];  // zero coefficient, want retention
  std::printf("  non-rejection lag4 %.2f%% (< 5), lag5 %.2f%% (in [88, 98])\n",
              lag4, lag5);
  const bool ok = lag4 < 5.0 && lag5 >= 88.0 && lag5 <= 98.0;
  verdict(2, ok);
  CHECK(ok);
}

TEST_CASE("criterion 3: quantile oracle equivalence and certificates",
          "[acceptance][c3]") {
  const double loss_tol = 1e-9;
  bool oracle_ok = true;
  double worst = 0.0;
  for (int s = 0; s < 1000; ++s) {
    auto rng = mfq::Rng::stream(23, static_cast<std::uint64_t>(s));
    const std::size_t n = 40 + static_cast<std::size_t>(rng.uniform() * 360.0);
    const double tau = rng.uniform(0.05, 0.95);
    Eigen::VectorXd y(static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i)
      y(static_cast<Eigen::Index>(i)) = rng.normal() * rng.uniform(0.5, 3.0);
    const Eigen::MatrixXd x = Eigen::MatrixXd::Ones(y.size(), 1);
    const auto f = mfq::fit(x, y, tau);
    // the optimum sits at an order statistic; enumerate them all
    double best = std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < y.size(); ++i)
      best = std::min(best,
                      mfq::check_loss_sum((y.array() - y(i)).matrix(), tau));
    worst = std::max(worst, std::abs(f.loss - best));
    if (!(std::abs(f.loss - best) <= loss_tol)) oracle_ok = false;
  }
  std::printf("  intercept-only fits: worst |loss - oracle| = %.2e\n", worst);

  int cert_failed = 0;
  for (const auto& s : recovery_studies()) cert_failed += s.n_cert_failed;
  std::printf("  certificate failures across the recovery studies: %d\n",
              cert_failed);
  const bool ok = oracle_ok && cert_failed == 0;
  verdict(3, ok);
  CHECK(ok);
}

TEST_CASE("criterion 4: beta-weight normalization and decay",
          "[acceptance][c4]") {
  const double sum_tol = 1e-12;
  bool ok = true;
  for (int s = 0; s < 10000; ++s) {
    auto rng = mfq::Rng::stream(24, static_cast<std::uint64_t>(s));
    const int k = 2 + static_cast<int>(rng.uniform() * 59.0);
    const double omega2 = rng.uniform(1.000001, 50.0);
    const auto bw = mfq::beta_weights(k, 1.0, omega2);
    double sum = 0.0;
    for (double w : bw.weights) sum += w;
    if (!(std::abs(sum - 1.0) <= sum_tol)) ok = false;
    for (std::size_t j = 0; j + 1 < bw.weights.size(); ++j)
      if (!(bw.weights[j] > bw.weights[j + 1])) ok = false;
  }
  verdict(4, ok);
  CHECK(ok);
}

TEST_CASE("criterion 5: stationarity check analytic case", "[acceptance][c5]") {
  const double radius_tol = 1e-12;
  bool ok = true;
  for (int s = 0; s < 200; ++s) {
    auto rng = mfq::Rng::stream(25, static_cast<std::uint64_t>(s));
    const double b1 = rng.uniform(0.01, 1.2);
    const double z_r = rng.uniform(0.5, 1.5);
    const auto rep = mfq::check_stationarity({b1}, rng.uniform(-0.5, 0.5),
                                             rng.uniform(-0.5, 0.5), z_r);
    if (!(std::abs(rep.spectral_radius - z_r * b1) <= radius_tol)) ok = false;
    if (rep.stationary != (z_r * b1 < 1.0)) ok = false;
  }
  // generating-process parameters must be admissible
  const mfq::DgpConfig dgp;
  const std::vector<double> lag_betas(dgp.betas.begin() + 1, dgp.betas.end());
  const auto rep = mfq::check_stationarity(lag_betas, dgp.theta, 0.0, 1.0);
  std::printf("  generating process: radius %.4f\n", rep.spectral_radius);
  if (!rep.stationary) ok = false;
  verdict(5, ok);
  CHECK(ok);
}

TEST_CASE("criterion 6: backtest size under the iid null", "[acceptance][c6]") {
  const int reps = 2000;
  const std::size_t n = 1000;
  const double tau = 0.05;
  const double band = 0.015;  // plus/minus, around the nominal 5% level
  const auto dates = dates_for(n);

  int rej_uc = 0, rej_cc = 0, rej_dq = 0;
  for (int rep = 0; rep < reps; ++rep) {
    auto rng = mfq::Rng::stream(26, static_cast<std::uint64_t>(rep));
    std::vector<double> rets(n), vars(n);
    for (std::size_t i = 0; i < n; ++i) {
      vars[i] = -1.0 + 0.1 * rng.normal();
      rets[i] = rng.uniform() < tau ? vars[i] - 1.0 : vars[i] + 1.0;
    }
    const auto track = mfq::make_track(dates, rets, vars, tau);
    rej_uc += mfq::kupiec_uc(track).p_value < 0.05 ? 1 : 0;
    rej_cc += mfq::christoffersen_cc(track).p_value < 0.05 ? 1 : 0;
    rej_dq += mfq::dq_test(track).p_value < 0.05 ? 1 : 0;
  }
  const double uc = static_cast<double>(rej_uc) / reps;
  const double cc = static_cast<double>(rej_cc) / reps;
  const double dq = static_cast<double>(rej_dq) / reps;
  std::printf("  empirical size: uc %.3f  cc %.3f  dq %.3f\n", uc, cc, dq);
  const bool ok = std::abs(uc - 0.05) <= band && std::abs(cc - 0.05) <= band &&
                  std::abs(dq - 0.05) <= band;
  verdict(6, ok);
  CHECK(ok);
}

TEST_CASE("criterion 7: in-sample coverage of the fitted model",
          "[acceptance][c7]") {
  mfq::DgpConfig dgp;
  dgp.n_daily = 5000;
  dgp.seed = 27;
  const auto panel = mfq::simulate_dgp(dgp);

  bool ok = true;
  for (const double tau : {0.01, 0.05, 0.10}) {
    mfq::MfqSpec spec;
    spec.tau = tau;
    spec.q = static_cast<int>(dgp.betas.size()) - 1;
    spec.k_lags = dgp.k_lags;
    spec.use_midas = true;
    spec.omega2_grid = mfq::default_omega2_grid();
    const auto m = mfq::fit_profiled(panel, spec);
    auto [y, x] = mfq::build_design(panel, spec, m.omega2_star, m.row_begin);
    const Eigen::VectorXd fitted = x * m.theta_star;
    std::size_t viol = 0;
    for (Eigen::Index i = 0; i < y.size(); ++i)
      viol += y(i) < fitted(i) ? 1 : 0;
    const double freq = static_cast<double>(viol) / static_cast<double>(y.size());
    const double band = 3.0 * std::sqrt(tau * (1.0 - tau) / 5000.0);
    std::printf("  tau %.2f: coverage %.4f (band +-%.4f)\n", tau, freq, band);
    if (!(std::abs(freq - tau) <= band)) ok = false;
  }
  verdict(7, ok);
  CHECK(ok);
}

TEST_CASE("criterion 8: model confidence set sanity", "[acceptance][c8]") {
  bool ok = true;
  const std::size_t n = 250;

  mfq::LossPanel dom;
  dom.models = {"good", "twin", "bad"};
  dom.tau = 0.05;
  dom.losses.resize(static_cast<Eigen::Index>(n), 3);
  for (std::size_t i = 0; i < n; ++i) {
    auto rng = mfq::Rng::stream(28, static_cast<std::uint64_t>(i));
    const double base = 1.0 + 0.2 * rng.normal();
    dom.losses(static_cast<Eigen::Index>(i), 0) = base;
    dom.losses(static_cast<Eigen::Index>(i), 1) = base + 0.1 * rng.normal();
    dom.losses(static_cast<Eigen::Index>(i), 2) = base + 1.0;
  }
  const auto rep = mfq::run_mcs(dom, 0.10, 2000, 10, 77);
  for (const double level : {0.75, 0.90}) {
    const auto& surv = rep.survivors.at(level);
    if (std::find(surv.begin(), surv.end(), "bad") != surv.end()) ok = false;
    if (std::find(surv.begin(), surv.end(), "good") == surv.end()) ok = false;
  }

  mfq::LossPanel same;
  same.models = {"a", "b"};
  same.tau = 0.05;
  same.losses.resize(static_cast<Eigen::Index>(n), 2);
  for (std::size_t i = 0; i < n; ++i) {
    auto rng = mfq::Rng::stream(29, static_cast<std::uint64_t>(i));
    const double v = 1.0 + 0.2 * rng.normal();
    same.losses(static_cast<Eigen::Index>(i), 0) = v;
    same.losses(static_cast<Eigen::Index>(i), 1) = v;
  }
  const auto rep_same = mfq::run_mcs(same, 0.10, 2000, 10, 77);
  for (const auto& [name, p] : rep_same.elimination_order)
    if (p != 1.0) ok = false;
  if (rep_same.survivors.at(0.90).size() != 2) ok = false;

  const auto rep2 = mfq::run_mcs(dom, 0.10, 2000, 10, 77);
  if (rep2.elimination_order != rep.elimination_order) ok = false;
  if (rep2.survivors != rep.survivors) ok = false;

  verdict(8, ok);
  CHECK(ok);
}

TEST_CASE("criterion 9: simulated out-of-sample pipeline", "[acceptance][c9]") {
  const int experiments = 100;
  const int needed = 90;

  mfq::ForecastOptions base;
  base.tau = 0.05;
  base.k_lags = 24;
  base.window = 750;
  base.stride = 125;
  base.oos_begin = 750;

  int included = 0;
  mfq::ModelForecast kept_model, kept_base;
  for (int e = 0; e < experiments; ++e) {
    mfq::DgpConfig dgp;
    dgp.n_daily = 1000;
    dgp.seed = mfq::Rng::stream(30, static_cast<std::uint64_t>(e)).raw();
    const auto panel = mfq::simulate_dgp(dgp);

    auto opt_m = base;
    opt_m.q = static_cast<int>(dgp.betas.size()) - 1;
    const auto fc_m = mfq::run_forecast_model(panel, "mfqarch", opt_m);
    auto opt_b = base;
    opt_b.q = 0;  // constant-VaR baseline
    const auto fc_b = mfq::run_forecast_model(panel, "qarch", opt_b);

    mfq::LossPanel lp;
    lp.models = {"mfqarch", "constant"};
    lp.tau = 0.05;
    const auto l_m = mfq::quantile_loss_series(fc_m.track);
    const auto l_b = mfq::quantile_loss_series(fc_b.track);
    lp.losses.resize(static_cast<Eigen::Index>(l_m.size()), 2);
    for (std::size_t i = 0; i < l_m.size(); ++i) {
      lp.losses(static_cast<Eigen::Index>(i), 0) = l_m[i];
      lp.losses(static_cast<Eigen::Index>(i), 1) = l_b[i];
    }
    const auto rep = mfq::run_mcs(lp, 0.10, 1000, 10,
                                  static_cast<std::uint64_t>(e) + 1);
    const auto& surv = rep.survivors.at(0.90);
    if (std::find(surv.begin(), surv.end(), "mfqarch") != surv.end())
      ++included;
    if (e == 0) {
      kept_model = fc_m;
      kept_base = fc_b;
    }
  }
  std::printf("  correctly specified model in the 0.90 survivor set: %d/%d\n",
              included, experiments);

  // report-format reproduction through the command layer on one experiment
  const auto dir = std::filesystem::temp_directory_path() / "mfqvar_acceptance";
  std::filesystem::remove_all(dir);
  auto cfg = mfq::parse_config_text("tau = 0.05\nmodels = mfqarch, constant\n"
                                    "mcs_boot = 1000\nseed = 3\n");
  cfg.out_dir = dir.string();
  kept_base.model = "constant";
  mfq::cli_detail::write_file(mfq::cli_detail::out_path(cfg, "forecast_mfqarch.csv"),
                              mfq::cli_detail::format_track_csv(cfg, kept_model));
  mfq::cli_detail::write_file(mfq::cli_detail::out_path(cfg, "forecast_constant.csv"),
                              mfq::cli_detail::format_track_csv(cfg, kept_base));
  mfq::cmd_backtest(cfg);
  mfq::cmd_mcs(cfg);
  const auto grab = [&dir](const std::string& name, std::size_t row) {
    std::ifstream in(dir / name);
    std::string line;
    for (std::size_t i = 0; i <= row; ++i) std::getline(in, line);
    return line;
  };
  bool format_ok =
      grab("backtest.csv", 1) == "model,lf_var,mean_var,sd_var,ae,uc_p,cc_p,dq_p" &&
      grab("mcs.csv", 2) == "order,model,mean_loss,p_value,in_75,in_90";
  std::filesystem::remove_all(dir);

  const bool ok = included >= needed && format_ok;
  verdict(9, ok);
  CHECK(ok);
}
