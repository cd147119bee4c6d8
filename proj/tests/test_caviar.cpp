#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <vector>

#include "mfqvar/caviar.hpp"
#include "mfqvar/rng.hpp"
#include "oracles.hpp"

using mfq::CaviarOptions;
using mfq::CaviarVariant;
using mfq::caviar_var_path;
using mfq::fit_caviar;

namespace {

std::vector<double> ar_abs_returns(std::uint64_t seed, std::size_t n) {
  mfq::Rng rng(seed);
  std::vector<double> r(n);
  double prev = 0.0;
  for (double& v : r) {
    prev = (0.2 + 0.4 * std::abs(prev)) * rng.normal();
    v = prev;
  }
  return r;
}

double intercept_loss(const std::vector<double>& returns, double tau) {
  // optimum over constants of the scored rows 1..n-1
  std::vector<double> scored(returns.begin() + 1, returns.end());
  return oracle::intercept_quantile_scan(scored, tau).min_loss;
}

}  // namespace

TEST_CASE("symmetric absolute value recursion by hand", "[caviar]") {
  std::vector<double> r{1.0, -2.0};
  Eigen::VectorXd b(3);
  b << -0.1, 0.5, -0.3;
  std::vector<double> v;
  REQUIRE(caviar_var_path(CaviarVariant::sav, b, r, 0.05, v));
  REQUIRE(v.size() == 3);
  // init: type-7 quantile of the first two observations at 0.05
  CHECK(v[0] == Catch::Approx(-1.85).margin(1e-12));
  CHECK(v[1] == Catch::Approx(-0.1 + 0.5 * v[0] - 0.3 * 1.0).margin(1e-12));
  CHECK(v[2] == Catch::Approx(-0.1 + 0.5 * v[1] - 0.3 * 2.0).margin(1e-12));
}

TEST_CASE("asymmetric slope picks its coefficient by sign", "[caviar]") {
  std::vector<double> r{1.0, -1.0, 0.0, 2.0};
  Eigen::VectorXd b(4);
  b << 0.0, 0.0, -0.2, -0.7;
  std::vector<double> v;
  REQUIRE(caviar_var_path(CaviarVariant::as, b, r, 0.05, v));
  CHECK(v[1] == Catch::Approx(-0.2).margin(1e-12));  // positive return
  CHECK(v[2] == Catch::Approx(-0.7).margin(1e-12));  // negative return
  CHECK(v[3] == Catch::Approx(0.0).margin(1e-12));   // zero return
}

TEST_CASE("indirect GARCH path and admissibility", "[caviar]") {
  std::vector<double> r{0.5, -1.0, 2.0};
  Eigen::VectorXd b(3);
  b << 0.04, 0.25, 0.09;
  std::vector<double> v;
  REQUIRE(caviar_var_path(CaviarVariant::ig, b, r, 0.05, v));
  for (std::size_t t = 1; t < v.size(); ++t) CHECK(v[t] < 0.0);
  CHECK(v[1] ==
        Catch::Approx(-std::sqrt(0.04 + 0.25 * v[0] * v[0] + 0.09 * 0.25))
            .margin(1e-12));

  Eigen::VectorXd bad(3);
  bad << -1.0, 0.0, 0.0;
  CHECK_FALSE(caviar_var_path(CaviarVariant::ig, bad, r, 0.05, v));
}

TEST_CASE("fitted recursion never loses to the nested constant", "[caviar]") {
  auto r = ar_abs_returns(17, 700);
  CaviarOptions opt;
  opt.n_starts = 2000;
  opt.n_refine = 6;
  const double floor_loss = intercept_loss(r, 0.05);
  for (auto variant :
       {CaviarVariant::sav, CaviarVariant::as, CaviarVariant::ig}) {
    auto m = fit_caviar(r, 0.05, variant, opt);
    CHECK(m.loss <= floor_loss + 1e-9);
    CHECK(m.n_obs == r.size() - 1);
    CHECK(m.betas.size() ==
          static_cast<Eigen::Index>(mfq::caviar_n_params(variant)));
  }
}

TEST_CASE("degenerate spike sample is matched by the flexible recursion",
          "[caviar]") {
  // mostly zero returns with a 5% spike at -1
  std::vector<double> r(600, 0.0);
  for (std::size_t i = 0; i < r.size(); i += 20) r[i] = -1.0;
  CaviarOptions opt;
  opt.n_starts = 2000;
  auto m = fit_caviar(r, 0.05, CaviarVariant::sav, opt);
  CHECK(m.loss <= intercept_loss(r, 0.05) + 1e-9);
  std::vector<double> v;
  REQUIRE(caviar_var_path(CaviarVariant::sav, m.betas, r, 0.05, v));
  for (double x : v) CHECK(std::isfinite(x));
}

TEST_CASE("asymmetric slopes agree on symmetric data", "[caviar][slow]") {
  // across replications the two slope coefficients share a mean
  const int reps = 500;
  CaviarOptions opt;
  opt.n_starts = 500;
  opt.n_refine = 5;
  opt.max_eval = 1500;
  std::vector<double> diff;
  for (int rep = 0; rep < reps; ++rep) {
    auto rng = mfq::Rng::stream(4242, static_cast<std::uint64_t>(rep));
    std::vector<double> r(400);
    for (double& x : r) x = rng.normal();
    opt.seed = 1000 + static_cast<std::uint64_t>(rep);
    auto m = fit_caviar(r, 0.05, CaviarVariant::as, opt);
    diff.push_back(m.betas(2) - m.betas(3));
  }
  const double mu = mfq::mean(diff);
  const double se = mfq::sample_sd(diff) / std::sqrt(static_cast<double>(reps));
  INFO("mean slope difference " << mu << " se " << se);
  CHECK(std::abs(mu) <= 3.0 * se);
}

TEST_CASE("caviar fit is deterministic and validates input", "[caviar]") {
  auto r = ar_abs_returns(3, 400);
  CaviarOptions opt;
  opt.n_starts = 800;
  auto a = fit_caviar(r, 0.05, CaviarVariant::sav, opt);
  auto b = fit_caviar(r, 0.05, CaviarVariant::sav, opt);
  CHECK(a.betas == b.betas);
  CHECK(a.loss == b.loss);

  CHECK_THROWS_AS(fit_caviar(std::vector<double>(100, 0.1), 0.05,
                             CaviarVariant::sav),
                  mfq::DataError);
  CHECK_THROWS_AS(fit_caviar(r, 1.2, CaviarVariant::sav), mfq::ConfigError);
  auto bad = r;
  bad[5] = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(fit_caviar(bad, 0.05, CaviarVariant::sav), mfq::DataError);
}
