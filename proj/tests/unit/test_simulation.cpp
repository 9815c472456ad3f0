#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <set>

#include "cherry/error.hpp"
#include "cherry/forecast.hpp"
#include "cherry/ingest.hpp"
#include "cherry/simulation.hpp"

using namespace cherry;

namespace {

// Factors with few decimal digits: every scaled count is an integer.
SimulationParams exact_params() {
  SimulationParams p;
  p.flower_bud_fraction = 0.6;
  p.blossoms_per_cluster = 2.5;
  p.fruit_set_fraction = 0.4;
  p.drop_fractions = {0.5, 0.2};
  p.attrition_rate = 0.0;
  p.count_scale = 1000;
  p.noise_sd = 0.0;
  return p;
}

}  // namespace

TEST_CASE("parameter validation names the parameter") {
  SimulationParams p;
  CHECK_NOTHROW(validate(p));
  p.fruit_set_fraction = 1.5;
  try {
    validate(p);
    FAIL("expected throw");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::invalid_argument);
    CHECK(std::string(e.what()).find("fruit_set_fraction") != std::string::npos);
  }
  p = {};
  p.drop_fractions = {0.1, -0.2};
  CHECK_THROWS_AS(validate(p), Error);
  p = {};
  p.noise_sd = -1;
  CHECK_THROWS_AS(validate(p), Error);
}

TEST_CASE("expected counts follow the phase factors") {
  SimulationParams p;
  p.initial_buds = 200;
  const auto schedule = default_schedule();
  auto e = expected_counts(p, schedule);
  REQUIRE(e.size() == 8);
  CHECK(e[0] == doctest::Approx(200));
  CHECK(e[1] == doctest::Approx(200 * 0.55));
  CHECK(e[2] == doctest::Approx(200 * 0.55 * 2.7));
  CHECK(e[3] == doctest::Approx(e[2]));
  CHECK(e[4] == doctest::Approx(e[3] * 0.35 * 0.9 * 0.95));
  CHECK(e[5] == doctest::Approx(e[4] * 0.99));
  CHECK(e[7] == doctest::Approx(e[4] * 0.99 * 0.99 * 0.99));
  for (std::size_t i = 0; i < schedule.size(); ++i)
    CHECK(expected_survival_slope(p, schedule, schedule[i].date) ==
          doctest::Approx(e[7] / e[i]).epsilon(1e-12));
}

TEST_CASE("frost removes fruit from its stage on") {
  SimulationParams p;
  p.frost = FrostEvent{BbchStage(60), 1.0};
  auto recs = simulate_branch(p, default_schedule());
  for (const auto& r : recs) {
    if (r.bbch >= BbchStage(60)) CHECK(r.object_count == 0);
  }
  CHECK(recs[1].object_count > 0);
}

TEST_CASE("branch output is a valid ledger with consistent harvest") {
  SimulationParams p;
  p.noise_sd = 4;
  auto recs = simulate_branch(p, default_schedule());
  REQUIRE(recs.size() == 10);
  auto build = build_ledger(recs);
  CHECK_FALSE(has_errors(build.violations));
  CHECK(recs[7].object_type == ObjectType::good_crops);
  CHECK(recs[7].object_count + recs[8].object_count == recs[9].object_count);
  CHECK(std::abs(*recs[7].crop_weight + *recs[8].crop_weight - *recs[9].crop_weight) < 1e-9);
}

TEST_CASE("schedules must end in a harvest") {
  SimulationParams p;
  std::vector<StageKey> empty;
  try {
    simulate_branch(p, empty);
    FAIL("expected throw");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::empty_schedule);
  }
  auto s = default_schedule();
  s.pop_back();
  CHECK_THROWS_AS(simulate_branch(p, s), Error);
  s = default_schedule();
  std::swap(s[1], s[2]);
  CHECK_THROWS_AS(simulate_branch(p, s), Error);
  CHECK_THROWS_AS(expected_survival_slope(p, default_schedule(), default_schedule(2022)[0].date),
                  Error);
}

TEST_CASE("seasons are deterministic per seed") {
  SimulationParams p;
  p.noise_sd = 3;
  p.seed = 7;
  const auto s = default_schedule();
  const auto a = emit_csv(simulate_season(p, 3, 6, s));
  const auto b = emit_csv(simulate_season(p, 3, 6, s));
  CHECK(a == b);
  p.seed = 8;
  CHECK(emit_csv(simulate_season(p, 3, 6, s)) != a);
}

TEST_CASE("season identities") {
  SimulationParams p;
  auto ledger = simulate_season(p, 3, 6, default_schedule());
  auto branches = ledger.branches();
  CHECK(branches.size() == 18);
  std::set<std::string> trees;
  for (const auto& b : branches) trees.insert(b.tree_id);
  CHECK(trees == std::set<std::string>{"sim_1", "sim_2", "sim_3"});
  CHECK(branch_identity(1, 3).branch_id == "2s4");
  CHECK_THROWS_AS(simulate_season(p, 0, 6, default_schedule()), Error);
}

TEST_CASE("noiseless calibration recovers the survival slope") {
  auto p = exact_params();
  const auto schedule = default_schedule();
  auto table = calibrate(simulate_season(p, 3, 6, schedule));
  REQUIRE(table.entries.size() == 7);
  for (const auto& e : table.entries) {
    const double expected = expected_survival_slope(p, schedule, e.stage.date);
    CHECK(std::abs(e.fit.slope - expected) < 1e-9);
    CHECK(std::abs(e.fit.intercept) < 1e-6);
    CHECK(e.fit.r_squared == 1.0);
  }
}

TEST_CASE("rounding error with generic fractions stays small at x1000") {
  // Default fractions do not give integral expectations; per-count rounding
  // of at most 0.5 moves the slope by about 0.5 / spread(x).
  SimulationParams p;
  p.count_scale = 1000;
  const auto schedule = default_schedule();
  auto table = calibrate(simulate_season(p, 3, 6, schedule));
  for (const auto& e : table.entries) {
    const double expected = expected_survival_slope(p, schedule, e.stage.date);
    CHECK(std::abs(e.fit.slope - expected) < 2e-5 * std::max(1.0, expected));
    CHECK(*e.fit.r_squared > 1 - 1e-8);
  }
}

TEST_CASE("config file") {
  const char* text =
      "# trial\n"
      "initial_buds = 120\n"
      "drop_fractions = 0.2, 0.1\n"
      "frost_bbch = 65\n"
      "frost_kill_fraction = 0,5\n"
      "seed = 42\n";
  auto cfg = parse_simulation_config(text);
  CHECK(cfg.params.initial_buds == 120);
  CHECK(cfg.params.drop_fractions == std::vector<double>{0.2, 0.1});
  REQUIRE(cfg.params.frost);
  CHECK(cfg.params.frost->kill_fraction == 0.5);
  CHECK(cfg.params.seed == 42);
  CHECK(cfg.schedule == default_schedule());

  auto custom = parse_simulation_config(
      "stage = 2024-03-05, 51, bud\nstage = 2024-05-01, 65, blossom\n"
      "stage = 2024-07-10, 89, totalCrops, Picking\n");
  REQUIRE(custom.schedule.size() == 3);
  CHECK(custom.schedule[2].label == "Picking");

  CHECK_THROWS_AS(parse_simulation_config("good_fraction = 2\n"), Error);
  CHECK_THROWS_AS(parse_simulation_config("bogus = 1\n"), Error);
  CHECK_THROWS_AS(parse_simulation_config("frost_bbch = 60\n"), Error);
  CHECK_THROWS_AS(parse_simulation_config("initial_buds\n"), Error);
}
