#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "mfqvar/simulate.hpp"
#include "oracles.hpp"

using mfq::DgpConfig;
using mfq::sample_skew_t;
using mfq::simulate_dgp;

TEST_CASE("skewed t sampler is standardized", "[simulate][skewt]") {
  for (auto [df, lam] : {std::pair{7.0, -0.95}, std::pair{5.0, 0.4}}) {
    auto z = sample_skew_t(df, lam, 1000000, 42);
    CHECK(std::abs(mfq::mean(z)) < 0.01);
    const double sd = mfq::sample_sd(z);
    CHECK(sd * sd == Catch::Approx(1.0).margin(0.01));
  }
}

TEST_CASE("skewed t sampler matches the symmetry of its parameter",
          "[simulate][skewt]") {
  auto sym = sample_skew_t(7.0, 0.0, 100000, 7);
  CHECK(std::abs(oracle::sample_skewness(sym)) < 0.1);
  auto left = sample_skew_t(7.0, -0.95, 100000, 7);
  CHECK(oracle::sample_skewness(left) < -0.5);
  auto right = sample_skew_t(7.0, 0.6, 100000, 7);
  CHECK(oracle::sample_skewness(right) > 0.3);
}

TEST_CASE("skewed t sampler validates and reproduces", "[simulate][skewt]") {
  CHECK_THROWS_AS(sample_skew_t(2.0, 0.0, 10, 1), mfq::ConfigError);
  CHECK_THROWS_AS(sample_skew_t(7.0, 1.0, 10, 1), mfq::ConfigError);
  auto a = sample_skew_t(7.0, -0.5, 100, 9);
  auto b = sample_skew_t(7.0, -0.5, 100, 9);
  CHECK(a == b);
}

TEST_CASE("degenerate process reduces to scaled white noise", "[simulate]") {
  DgpConfig cfg;
  cfg.betas = {0.05};
  cfg.theta = 0.0;
  cfg.n_daily = 20000;
  cfg.seed = 31;
  auto p = simulate_dgp(cfg);
  REQUIRE(p.n_daily() == 20000);
  std::vector<double> r(p.ret.begin(), p.ret.end());
  CHECK(mfq::mean(r) == Catch::Approx(0.0).margin(3.0 * 0.05 / std::sqrt(20000.0)));
  CHECK(mfq::sample_sd(r) == Catch::Approx(0.05).epsilon(0.03));
}

TEST_CASE("panel geometry and determinism", "[simulate]") {
  DgpConfig cfg;
  cfg.n_daily = 1000;
  cfg.seed = 77;
  auto p = simulate_dgp(cfg);
  CHECK(p.n_daily() == 1000);
  CHECK(p.trimmed_prefix == 0);
  CHECK(p.k_lags == 24);
  CHECK_FALSE(p.has_x);
  // first daily month must sit at least k_lags months into the monthly series
  CHECK(p.month_of[0] >= 24);
  for (double v : p.ret) CHECK(std::isfinite(v));

  auto q = simulate_dgp(cfg);
  CHECK(p.ret == q.ret);
  CHECK(p.mv == q.mv);
  cfg.seed = 78;
  auto s = simulate_dgp(cfg);
  CHECK(p.ret != s.ret);
}

TEST_CASE("returns divided by the implied scale recover unit normals",
          "[simulate]") {
  // reconstructs the conditional scale from the emitted panel alone, so any
  // misalignment of months, lags, or volatility history would show up here
  DgpConfig cfg;
  cfg.n_daily = 4000;
  cfg.seed = 5;
  auto p = simulate_dgp(cfg);
  auto w = mfq::beta_weights(cfg.k_lags, 1.0, cfg.omega2);
  std::vector<double> z;
  for (std::size_t i = 4; i < p.n_daily(); ++i) {
    const double ws = std::abs(mfq::weighted_sum(p, p.month_of[i], w));
    double scale = cfg.betas[0] + cfg.theta * ws;
    for (std::size_t j = 1; j < cfg.betas.size(); ++j)
      scale += cfg.betas[j] * std::abs(p.ret[i - j]);
    REQUIRE(scale > 0.0);
    z.push_back(p.ret[i] / scale);
  }
  CHECK(mfq::mean(z) == Catch::Approx(0.0).margin(3.0 / std::sqrt(4000.0)));
  CHECK(mfq::sample_sd(z) == Catch::Approx(1.0).margin(0.05));
  CHECK(std::abs(oracle::sample_skewness(z)) < 0.12);
}

TEST_CASE("the study's default parameter set passes validation", "[simulate]") {
  DgpConfig cfg;
  CHECK_NOTHROW(mfq::validate_dgp(cfg));
  SECTION("explosive lag polynomial") {
    cfg.betas = {0.05, 1.2};
    CHECK_THROWS_AS(mfq::validate_dgp(cfg), mfq::ConfigError);
  }
  SECTION("unit root in the monthly driver") {
    cfg.phi = 1.0;
    CHECK_THROWS_AS(mfq::validate_dgp(cfg), mfq::ConfigError);
  }
  SECTION("invalid innovation settings") {
    cfg.mv_df = 2.0;
    CHECK_THROWS_AS(mfq::validate_dgp(cfg), mfq::ConfigError);
  }
  SECTION("missing intercept") {
    cfg.betas = {};
    CHECK_THROWS_AS(mfq::validate_dgp(cfg), mfq::ConfigError);
  }
}

TEST_CASE("monte carlo study aggregates and reproduces", "[simulate][mc]") {
  DgpConfig cfg;
  cfg.n_daily = 1200;
  cfg.seed = 2026;
  mfq::McOptions opt;
  opt.do_lagtest = true;
  opt.certify = true;
  auto results = mfq::run_mc_study(cfg, 10, {0.05, 0.25}, 2, opt);
  REQUIRE(results.size() == 2);

  const auto& r5 = results[0];
  CHECK(r5.tau == 0.05);
  CHECK(r5.names.size() == 7);
  CHECK(r5.names[1] == "theta");
  CHECK(r5.names[6] == "gamma4");
  CHECK(r5.estimates.rows() + r5.n_failed == 10);
  CHECK(r5.estimates.cols() == 7);
  CHECK(r5.n_cert_failed == 0);
  CHECK(r5.nonrejection_pct.size() == 2);
  // beta1 = 0.30 gives the LR test plenty of power even at this length
  CHECK(r5.nonrejection_pct[0] < 40.0);
  // loose recovery bands for a 10-replicate smoke run
  CHECK(r5.mean(0) == Catch::Approx(cfg.betas[0]).margin(0.05));
  CHECK(r5.mean(3) == Catch::Approx(cfg.betas[1]).margin(0.2));
  for (Eigen::Index c = 0; c < r5.mse.size(); ++c) CHECK(r5.mse(c) >= 0.0);

  // identical settings reproduce; thread count must not matter
  auto again = mfq::run_mc_study(cfg, 10, {0.05, 0.25}, 2, opt);
  CHECK(again[0].estimates == r5.estimates);
  CHECK(again[1].estimates == results[1].estimates);
  mfq::McOptions opt2 = opt;
  opt2.n_threads = 3;
  auto threaded = mfq::run_mc_study(cfg, 10, {0.05, 0.25}, 2, opt2);
  CHECK(threaded[0].estimates == r5.estimates);
  CHECK(threaded[0].nonrejection_pct == r5.nonrejection_pct);
}

TEST_CASE("monte carlo study validates its arguments", "[simulate][mc]") {
  DgpConfig cfg;
  CHECK_THROWS_AS(mfq::run_mc_study(cfg, 0, {0.05}, 1), mfq::ConfigError);
  CHECK_THROWS_AS(mfq::run_mc_study(cfg, 5, {}, 1), mfq::ConfigError);
  CHECK_THROWS_AS(mfq::run_mc_study(cfg, 5, {1.5}, 1), mfq::ConfigError);
}
