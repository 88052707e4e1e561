#pragma once

#include <vector>

#include <Eigen/Core>

#include "sabpi/scenario.hpp"

namespace sabpi {

struct BeliefEntry {
  int q = 0;    // DFA state
  int hyp = 0;  // index into Scenario::hypotheses
  double p = 0.0;
};

/// Hybrid belief: deterministic continuous state and memory, plus a finite
/// distribution over (DFA state, environment hypothesis) pairs. Entries are
/// kept sorted by (q, hyp), strictly positive, and normalized. Immutable
/// value; updates produce new beliefs.
struct HybridBelief {
  Eigen::VectorXd x;
  MemoryVector memory = 0;
  std::vector<BeliefEntry> dist;

  double acc_mass(const Dfa& dfa) const;
  double trap_mass(const Dfa& dfa) const;
};

/// Probability mass below which outcomes and posterior entries are pruned.
inline constexpr double kBeliefPruneEps = 1e-12;

/// Initial belief: prior over hypotheses at the initial DFA state, then the
/// initial-label DFA jump (the trace always starts with the label of x0).
HybridBelief initial_belief(const Scenario& s);

/// DFA jump at b.x: each (q, e) moves to (delta(q, label_at(x, e)), e).
/// x and memory unchanged.
HybridBelief region_jump(const Scenario& s, const HybridBelief& b);

/// DFA jump under a forced symbol, identical for every hypothesis. Used for
/// collision/out-of-bounds semantics.
HybridBelief symbol_jump(const Scenario& s, const HybridBelief& b, ApSet symbol);

struct ObsOutcome {
  int obs = 0;
  double prob = 0.0;
  HybridBelief belief;
};

/// First-visit observation jump at b.x inside the given observation region:
/// composes the DFA jump (the region may carry labels) with the Bayes update,
/// sets the memory bit, and returns one posterior per observation with
/// probability above the pruning threshold. Calling this on an
/// already-visited region is a contract violation.
std::vector<ObsOutcome> observation_outcomes(const Scenario& s, const HybridBelief& b,
                                             int obs_region);

}  // namespace sabpi
