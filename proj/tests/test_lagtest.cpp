#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "mfqvar/lag_test.hpp"
#include "mfqvar/rng.hpp"
#include "oracles.hpp"

namespace {

mfq::MixedFreqPanel ar_abs_panel(std::uint64_t seed, std::size_t n,
                                 double b0, double b1) {
  mfq::Rng rng(seed);
  std::vector<double> rets(n);
  double prev = 0.0;
  for (double& r : rets) {
    prev = (b0 + b1 * std::abs(prev)) * rng.normal();
    r = prev;
  }
  const int n_months = static_cast<int>(n + 20) / 21;
  auto daily = oracle::make_daily(2001, 1, std::vector<int>(n_months, 21), rets);
  daily.resize(n);
  auto monthly =
      oracle::make_monthly(2000, 12, std::vector<double>(n_months + 2, 1.0));
  return mfq::build_panel(daily, monthly, 1);
}

mfq::MfqSpec plain_spec() {
  mfq::MfqSpec s;
  s.q = 0;
  s.k_lags = 1;
  s.use_midas = false;
  s.use_x = false;
  return s;
}

}  // namespace

TEST_CASE("strong first lag is detected and reported for every step",
          "[lagtest]") {
  auto p = ar_abs_panel(11, 2500, 0.1, 0.45);
  auto res = mfq::sequential_lag_test(p, plain_spec(), 0.05, 3, 0.05);

  REQUIRE(res.steps.size() == 3);
  CHECK(res.n_obs == 2500 - 3);
  CHECK(res.steps[0].q_restricted == 0);
  CHECK(res.steps[0].q_unrestricted == 1);
  CHECK(res.steps[0].rejected);
  CHECK(res.steps[0].test.p_value < 1e-4);
  CHECK(res.selected_q >= 1);

  // fits are shared across consecutive steps, so the losses chain exactly
  for (std::size_t j = 0; j + 1 < res.steps.size(); ++j)
    CHECK(res.steps[j].test.v_unrestricted ==
          res.steps[j + 1].test.v_restricted);
  // nesting on the common sample keeps the loss sequence non-increasing
  for (const auto& step : res.steps)
    CHECK(step.test.v_restricted >= step.test.v_unrestricted - 1e-9);
}

TEST_CASE("single-step test on a strong-lag process selects q = 1", "[lagtest]") {
  auto p = ar_abs_panel(77, 2000, 0.1, 0.45);
  auto res = mfq::sequential_lag_test(p, plain_spec(), 0.05, 1, 0.05);
  REQUIRE(res.steps.size() == 1);
  CHECK(res.selected_q == 1);
}

TEST_CASE("selection stops at the first non-rejection", "[lagtest]") {
  // lag-1 process: steps past the first should mostly accept, and selected_q
  // must equal the count of leading rejections
  auto p = ar_abs_panel(5, 3000, 0.1, 0.45);
  auto res = mfq::sequential_lag_test(p, plain_spec(), 0.05, 4, 0.05);
  REQUIRE(res.steps.size() == 4);
  int lead = 0;
  while (lead < 4 && res.steps[static_cast<std::size_t>(lead)].rejected) ++lead;
  CHECK(res.selected_q == lead);
}

TEST_CASE("rejection rate under the null is close to alpha", "[lagtest][slow]") {
  // white-noise returns: H0 beta_1 = 0 holds, so step 1 rejects ~alpha
  const int reps = 1000;
  const double alpha = 0.05;
  int rejections = 0;
  for (int rep = 0; rep < reps; ++rep) {
    auto rng = mfq::Rng::stream(909, static_cast<std::uint64_t>(rep));
    std::vector<double> rets(1200);
    for (double& r : rets) r = rng.normal();
    auto daily = oracle::make_daily(2001, 1, std::vector<int>(58, 21), rets);
    daily.resize(rets.size());
    auto monthly =
        oracle::make_monthly(2000, 12, std::vector<double>(60, 1.0));
    auto p = mfq::build_panel(daily, monthly, 1);
    auto res = mfq::sequential_lag_test(p, plain_spec(), 0.05, 1, alpha);
    if (res.steps[0].rejected) ++rejections;
  }
  const double rate = static_cast<double>(rejections) / reps;
  const double band = 2.0 * std::sqrt(alpha * (1.0 - alpha) / reps);
  INFO("rate " << rate);
  CHECK(rate >= alpha - band);
  CHECK(rate <= alpha + band);
}

TEST_CASE("lag test validates its arguments", "[lagtest]") {
  auto p = ar_abs_panel(3, 300, 0.1, 0.2);
  CHECK_THROWS_AS(mfq::sequential_lag_test(p, plain_spec(), 0.05, 0, 0.05),
                  mfq::ConfigError);
  CHECK_THROWS_AS(mfq::sequential_lag_test(p, plain_spec(), 0.05, 2, 0.0),
                  mfq::ConfigError);
  CHECK_THROWS_AS(mfq::sequential_lag_test(p, plain_spec(), 0.05, 2, 1.0),
                  mfq::ConfigError);
}
