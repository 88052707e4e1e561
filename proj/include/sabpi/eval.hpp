#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "sabpi/planner.hpp"
#include "sabpi/policy.hpp"
#include "sabpi/scenario.hpp"

namespace sabpi {

struct TraceEvent {
  std::string type;  // "region", "observe", "crash", "stop"
  int region = -1;
  int obs = -1;
  double t = 0.0;  // propagation time of the segment ending in this event
};

struct TrialTrace {
  int hypothesis = -1;  // index of the sampled true environment
  bool success = false;
  std::vector<TraceEvent> events;
};

struct EvalReport {
  int trials = 0;
  int successes = 0;
  double rate = 0.0;
  double ci_low = 0.0;  // Wilson 95% interval
  double ci_high = 1.0;
};

/// Wilson score interval for a binomial proportion at 95% confidence.
std::pair<double, double> wilson_interval(int successes, int trials);

/// Monte-Carlo policy execution: samples the true environment from the prior,
/// replays the policy's controls through the deterministic dynamics, samples
/// observations from the sensor model, and tracks the true automaton state.
/// Running off the stored policy tree counts as failure.
EvalReport execute_policy(const Scenario& s, const PolicyArtifact& policy, int trials,
                          std::uint64_t seed, std::vector<TrialTrace>* traces = nullptr);

/// Exact success probability of the stored policy: probability-weighted
/// accepting mass over its leaves.
double policy_success_exact(const PolicyArtifact& policy);

/// Optimal value over event-level plans: an idealized agent that can jump to
/// any region boundary at will, choosing up to max_events region entries and
/// first-visit observations before stopping. Upper-bounds every continuous
/// policy when regions are pairwise disjoint.
double oracle_optimal_value(const Scenario& s, int max_events = 12);

/// Observation region targeted first along the policy's nominal path, found
/// as the first memory-bit change from the root; -1 when the policy never
/// senses.
int first_committed_region(const PolicyArtifact& policy);

/// Observation regions visited anywhere in the policy tree.
std::vector<int> observed_targets(const Scenario& s, const PolicyArtifact& policy);

/// CSV with one row per anytime sample: scenario, algorithm, seed, iteration,
/// time, value.
std::string convergence_report(const std::vector<PlanReport>& reports);

}  // namespace sabpi
