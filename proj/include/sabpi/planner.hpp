#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "sabpi/policy.hpp"
#include "sabpi/propagate.hpp"
#include "sabpi/tree.hpp"

namespace sabpi {

enum class Algorithm { Sabpi, Rrt, MctsPw };

Algorithm algorithm_from_string(const std::string& name);
std::string to_string(Algorithm a);

struct PlannerConfig {
  Algorithm algorithm = Algorithm::Sabpi;
  int k = 1000;                    // expansions per subtree selection
  double c = 0.05;                 // exploration constant
  double time_limit = 60.0;        // seconds
  double success_threshold = 1.0;  // stop once root value reaches this
  std::uint64_t seed = 0;
  long max_iterations = -1;  // outer iterations; -1 = unbounded
  long max_nodes = 400000;   // tree size resource bound
  bool voronoi_select = true;  // bias expansion toward sparse regions
  // MCTS progressive widening: a node with N visits admits up to
  // k_w * N^alpha_w arms.
  double k_w = 2.0;
  double alpha_w = 0.5;
  int rollout_depth = 10;
};

struct AnytimeSample {
  long iteration = 0;
  double time = 0.0;  // wall-clock, excluded from determinism comparisons
  double value = 0.0;
};

struct PlanReport {
  std::string scenario_name;
  std::string algorithm;
  std::uint64_t seed = 0;
  double root_value = 0.0;
  long iterations = 0;
  long node_count = 0;
  long root_arms = 0;
  double wall_time = 0.0;
  std::vector<AnytimeSample> anytime;
};

struct PlanResult {
  PolicyArtifact policy;
  PlanReport report;
};

PlanResult plan(const Scenario& s, const PlannerConfig& cfg);

nlohmann::json report_to_json(const PlanReport& r);

/// Samples a control uniformly from the control box and a duration uniformly
/// from (0, t_prop_max]; expands `node` with one propagation, creating the
/// arm, its outcome children, and backpropagating. Returns the new child ids
/// (empty for discarded or degenerate propagations).
std::vector<int> expand_node(SearchTree& tree, const Scenario& s, std::mt19937_64& rng, int node);

}  // namespace sabpi
