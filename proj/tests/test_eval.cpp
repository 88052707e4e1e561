#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <nlohmann/json.hpp>

#include "sabpi/eval.hpp"
#include "sabpi/planner.hpp"

using namespace sabpi;
using nlohmann::json;

namespace {

std::string scenario_path(const std::string& name) {
  return std::string(SABPI_SCENARIO_DIR) + "/" + name + ".json";
}

// Two rocks, exactly one of which is good; committing to the wrong rock fails.
// An optional sensor reads rock A. With the sensor the best plan senses first
// and then visits the indicated rock, succeeding iff the reading was correct.
Scenario pick_fixture(double p_a_good, bool with_sensor, double accuracy) {
  json j = json::parse(R"json({
    "name": "pick",
    "ap": ["sample", "good"],
    "workspace": {
      "state_low": [0, 0], "state_high": [10, 10],
      "control_low": [-1, -1], "control_high": [1, 1]
    },
    "dynamics": {"type": "single_integrator"},
    "regions": [
      {"id": "rockA", "geometry": {"type": "ball", "center": [2, 8], "radius": 0.5},
       "labels": ["sample"], "uncertain": ["good"]},
      {"id": "rockB", "geometry": {"type": "ball", "center": [8, 8], "radius": 0.5},
       "labels": ["sample"], "uncertain": ["good"]}
    ],
    "observation_regions": [],
    "prior": {"joint": []},
    "task": "!sample U (sample & good)",
    "initial": {"x": [5, 1]}
  })json");
  j["prior"]["joint"] = json::array({
      json{{"assign", {{"rockA.good", true}, {"rockB.good", false}}}, {"p", p_a_good}},
      json{{"assign", {{"rockA.good", false}, {"rockB.good", true}}}, {"p", 1.0 - p_a_good}},
  });
  if (with_sensor)
    j["observation_regions"] = json::array({json{
        {"id", "senseA"},
        {"geometry", {{"type", "ball"}, {"center", {2.0, 5.0}}, {"radius", 0.5}}},
        {"target", "rockA"},
        {"accuracy", accuracy},
    }});
  return load_scenario(j);
}

}  // namespace

TEST_CASE("wilson interval matches hand values and degenerate cases") {
  auto [lo, hi] = wilson_interval(50, 100);
  CHECK(lo == doctest::Approx(0.4038).epsilon(1e-3));
  CHECK(hi == doctest::Approx(0.5962).epsilon(1e-3));

  auto [lo0, hi0] = wilson_interval(0, 0);
  CHECK(lo0 == 0.0);
  CHECK(hi0 == 1.0);

  auto [lo1, hi1] = wilson_interval(100, 100);
  CHECK(hi1 == 1.0);
  CHECK(lo1 > 0.9);

  auto [loz, hiz] = wilson_interval(0, 100);
  CHECK(loz < 1e-15);
  CHECK(hiz < 0.05);

  // Wider interval with fewer trials at the same rate.
  auto [lo_small, hi_small] = wilson_interval(5, 10);
  CHECK(hi_small - lo_small > hi - lo);
}

TEST_CASE("oracle value of a committed choice without sensing is the best prior") {
  Scenario s = pick_fixture(0.3, false, 0.0);
  CHECK(oracle_optimal_value(s) == doctest::Approx(0.7).epsilon(1e-12));
  CHECK(oracle_optimal_value(s, 0) == 0.0);
  CHECK(oracle_optimal_value(s, 1) == doctest::Approx(0.7).epsilon(1e-12));
}

TEST_CASE("oracle value with a sensor equals the sensor accuracy") {
  // Symmetric prior: either reading points at a rock that is good with
  // probability equal to the sensor accuracy.
  Scenario s = pick_fixture(0.5, true, 0.8);
  CHECK(oracle_optimal_value(s) == doctest::Approx(0.8).epsilon(1e-12));
  // One event only buys the blind commit.
  CHECK(oracle_optimal_value(s, 1) == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("oracle value is monotone in the event budget") {
  Scenario s = load_scenario_file(scenario_path("crs"));
  double prev = oracle_optimal_value(s, 0);
  CHECK(prev == 0.0);
  for (int depth = 1; depth <= 8; ++depth) {
    double v = oracle_optimal_value(s, depth);
    CHECK(v >= prev - 1e-15);
    prev = v;
  }
  CHECK(prev <= 1.0);
}

TEST_CASE("a task satisfied at the start has oracle value one") {
  Scenario s = pick_fixture(0.3, false, 0.0);
  s.x0 << 2.0, 8.0;  // start on rock A: accepted under the A-good hypothesis
  CHECK(oracle_optimal_value(s, 0) == doctest::Approx(0.3).epsilon(1e-12));
  CHECK(oracle_optimal_value(s) == doctest::Approx(0.3).epsilon(1e-12));
}

TEST_CASE("a certainly solved policy executes with rate one") {
  Scenario s = load_scenario_file(scenario_path("door_key"));
  PlannerConfig cfg;
  cfg.seed = 4;
  cfg.time_limit = 60.0;
  PlanResult res = plan(s, cfg);
  REQUIRE(res.report.root_value == 1.0);
  CHECK(policy_success_exact(res.policy) == doctest::Approx(1.0).epsilon(1e-12));

  std::vector<TrialTrace> traces;
  EvalReport rep = execute_policy(s, res.policy, 300, 17, &traces);
  CHECK(rep.successes == 300);
  CHECK(rep.rate == 1.0);
  REQUIRE(traces.size() == 300);
  for (const auto& tr : traces) {
    CHECK(tr.success);
    CHECK(tr.hypothesis >= 0);
    CHECK(!tr.events.empty());
    bool observed = false;
    for (const auto& ev : tr.events) observed |= ev.type == "observe";
    CHECK(observed);  // the key cabinet must be inspected on every branch
  }
}

TEST_CASE("monte-carlo execution agrees with the exact policy value") {
  Scenario s = load_scenario_file(scenario_path("crs"));
  PlannerConfig cfg;
  cfg.seed = 4;
  cfg.time_limit = 60.0;
  cfg.success_threshold = 0.85;
  PlanResult res = plan(s, cfg);
  REQUIRE(res.report.root_value >= 0.85);
  double exact = policy_success_exact(res.policy);
  CHECK(exact == doctest::Approx(res.report.root_value).epsilon(1e-9));

  EvalReport rep = execute_policy(s, res.policy, 4000, 21);
  CHECK(std::abs(rep.rate - exact) < 0.03);
  CHECK(rep.ci_low <= exact);
  CHECK(rep.ci_high >= exact);
}

TEST_CASE("the best-prior sensor is probed first on the rock hunt") {
  Scenario s = load_scenario_file(scenario_path("crs"));
  PlannerConfig cfg;
  cfg.seed = 2;
  cfg.time_limit = 60.0;
  cfg.success_threshold = 0.85;
  PlanResult res = plan(s, cfg);
  REQUIRE(res.report.root_value >= 0.85);
  CHECK(first_committed_region(res.policy) == 2);
  std::vector<int> seen = observed_targets(s, res.policy);
  CHECK(std::find(seen.begin(), seen.end(), 2) != seen.end());
}

TEST_CASE("a policy that never senses reports no committed sensor") {
  Scenario s = pick_fixture(0.3, false, 0.0);
  PlannerConfig cfg;
  cfg.time_limit = 30.0;
  cfg.success_threshold = 0.69;
  cfg.seed = 1;
  PlanResult res = plan(s, cfg);
  REQUIRE(res.report.root_value >= 0.69);
  CHECK(first_committed_region(res.policy) == -1);
  CHECK(observed_targets(s, res.policy).empty());
}

TEST_CASE("convergence report lists one row per anytime sample") {
  PlanReport a;
  a.scenario_name = "crs";
  a.algorithm = "sabpi";
  a.seed = 7;
  a.anytime = {{10, 0.5, 0.25}, {20, 1.5, 0.5}};
  PlanReport b;
  b.scenario_name = "crs";
  b.algorithm = "rrt";
  b.seed = 8;
  b.anytime = {{5, 0.25, 0.1}};
  std::string csv = convergence_report({a, b});
  CHECK(csv ==
        "scenario,algorithm,seed,iteration,time,value\n"
        "crs,sabpi,7,10,0.5,0.25\n"
        "crs,sabpi,7,20,1.5,0.5\n"
        "crs,rrt,8,5,0.25,0.1\n");
}
