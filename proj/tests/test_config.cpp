#include <catch2/catch_amalgamated.hpp>

#include <string>

#include "mfqvar/config.hpp"

using mfq::parse_config_text;
using mfq::RunConfig;

TEST_CASE("defaults hold on an empty config", "[config]") {
  const RunConfig cfg = parse_config_text("");
  CHECK(cfg.tau == 0.05);
  CHECK(cfg.q == 1);
  CHECK_FALSE(cfg.q_auto);
  CHECK(cfg.k_lags == 12);
  CHECK(cfg.window == 1500);
  CHECK(cfg.stride == 10);
  CHECK(cfg.models.empty());
  CHECK(cfg.seed == 1);
  CHECK(cfg.mcs_boot == 5000);
  CHECK(cfg.sim_n == std::vector<std::size_t>{2500});
  CHECK(cfg.config_hash.size() == 16);
}

TEST_CASE("full configuration round trip", "[config]") {
  const std::string text = R"(# run setup
tau = 0.01
q = auto
q_max = 6
k_lags = 18
window = 900
stride = 5
oos_start = 2015-03-02
models = mfqarch, qarch , sav
seed = 99
threads = 4
daily = d.csv
monthly = m.csv
out = results
mcs_delta = 0.25
sim_n = 1250, 2500
sim_taus = 0.05, 0.25
dgp_betas = 0.05, 0.4
dgp_theta = 0.2

[qarch]
q = 3
)";
  const RunConfig cfg = parse_config_text(text);
  CHECK(cfg.tau == 0.01);
  CHECK(cfg.q_auto);
  CHECK(cfg.q_max == 6);
  CHECK(cfg.k_lags == 18);
  CHECK(cfg.window == 900);
  CHECK(cfg.stride == 5);
  CHECK(cfg.has_oos_start);
  CHECK(cfg.oos_start.year == 2015);
  CHECK(cfg.oos_start.month == 3);
  CHECK(cfg.models == std::vector<std::string>{"mfqarch", "qarch", "sav"});
  CHECK(cfg.seed == 99);
  CHECK(cfg.n_threads == 4);
  CHECK(cfg.daily_path == "d.csv");
  CHECK(cfg.monthly_path == "m.csv");
  CHECK(cfg.out_dir == "results");
  CHECK(cfg.mcs_delta == 0.25);
  CHECK(cfg.sim_n == std::vector<std::size_t>{1250, 2500});
  CHECK(cfg.sim_taus == std::vector<double>{0.05, 0.25});
  CHECK(cfg.dgp.betas == std::vector<double>{0.05, 0.4});
  CHECK(cfg.dgp.theta == 0.2);

  SECTION("per-model override applies to that model only") {
    const auto qa = mfq::model_forecast_options(cfg, "qarch", 900);
    CHECK(qa.q == 3);
    CHECK_FALSE(qa.q_auto);
    const auto mf = mfq::model_forecast_options(cfg, "mfqarch", 900);
    CHECK(mf.q_auto);
  }
}

TEST_CASE("config hashes track the file bytes", "[config]") {
  const auto a = parse_config_text("tau = 0.05\n");
  const auto b = parse_config_text("tau = 0.05\n");
  const auto c = parse_config_text("tau = 0.10\n");
  CHECK(a.config_hash == b.config_hash);
  CHECK(a.config_hash != c.config_hash);
}

TEST_CASE("config rejects malformed input", "[config]") {
  CHECK_THROWS_AS(parse_config_text("tau 0.05\n"), mfq::ConfigError);
  CHECK_THROWS_AS(parse_config_text("= 0.05\n"), mfq::ConfigError);
  CHECK_THROWS_AS(parse_config_text("[open\n"), mfq::ConfigError);
  CHECK_THROWS_AS(parse_config_text("[]\n"), mfq::ConfigError);
  CHECK_THROWS_AS(parse_config_text("mystery = 1\n"), mfq::ConfigError);
  CHECK_THROWS_AS(parse_config_text("tau = maybe\n"), mfq::ConfigError);
  CHECK_THROWS_AS(parse_config_text("window = 12monkeys\n"), mfq::ConfigError);
  CHECK_THROWS_AS(parse_config_text("sim_lagtest = perhaps\n"),
                  mfq::ConfigError);
  CHECK_THROWS_AS(parse_config_text("oos_start = 2015-13-01\n"),
                  mfq::ConfigError);
  CHECK_THROWS_AS(parse_config_text("stride = 0\n"), mfq::ConfigError);
  CHECK_THROWS_AS(parse_config_text("threads = 0\n"), mfq::ConfigError);
  CHECK_THROWS_AS(parse_config_text("tau = 1.5\n"), mfq::ConfigError);
  CHECK_THROWS_AS(parse_config_text("sim_taus = 0.05, 2\n"), mfq::ConfigError);
  CHECK_THROWS_AS(parse_config_text("[nonmodel]\nq = 1\n"), mfq::ConfigError);
  CHECK_THROWS_AS(parse_config_text("[sav]\nwindow = 10\n"), mfq::ConfigError);
  CHECK_THROWS_AS(mfq::parse_config_file("/no/such/file.cfg"),
                  mfq::ConfigError);
}
