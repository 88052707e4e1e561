#include "sabpi/eval.hpp"

#include <cmath>
#include <map>
#include <random>
#include <sstream>
#include <stdexcept>

#include "sabpi/belief.hpp"
#include "sabpi/propagate.hpp"

namespace sabpi {

std::pair<double, double> wilson_interval(int successes, int trials) {
  if (trials <= 0) return {0.0, 1.0};
  const double z = 1.959963984540054;
  double n = trials;
  double p = successes / n;
  double z2 = z * z;
  double denom = 1.0 + z2 / n;
  double center = (p + z2 / (2.0 * n)) / denom;
  double half = z * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n)) / denom;
  return {std::max(0.0, center - half), std::min(1.0, center + half)};
}

namespace {

int sample_hypothesis(const Scenario& s, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  double r = unit(rng), cum = 0.0;
  int last = -1;
  for (std::size_t h = 0; h < s.hypotheses.size(); ++h) {
    if (s.hypotheses[h].prior <= 0.0) continue;
    last = static_cast<int>(h);
    cum += s.hypotheses[h].prior;
    if (r <= cum) return last;
  }
  return last;
}

bool run_trial(const Scenario& s, const PolicyArtifact& policy, std::mt19937_64& rng,
               TrialTrace* trace) {
  int h = sample_hypothesis(s, rng);
  HypMask e = s.hypotheses[h].mask;
  if (trace) trace->hypothesis = h;
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  // The trace starts with the label of x0, mirroring the initial belief jump.
  int q = s.dfa.step(s.dfa.initial, s.label_at(s.x0, e));
  int node = policy.root;
  while (true) {
    if (s.dfa.trap[q]) return false;
    const PolicyNode& n = policy.nodes[node];
    if (!n.has_arm) {
      if (trace) trace->events.push_back({"stop", -1, -1, 0.0});
      return s.dfa.accepting[q];
    }
    PropagationResult pr = propagate(s, n.belief.x, n.belief.memory, n.u, n.duration);
    int next = -1;
    switch (pr.outcome) {
      case PropOutcome::FullDuration:
        if (!n.children.empty()) next = n.children[0].child;
        break;
      case PropOutcome::HitRegion:
        q = s.dfa.step(q, s.label_at(pr.x_end, e));
        if (trace) trace->events.push_back({"region", pr.region, -1, pr.t_actual});
        if (!n.children.empty()) next = n.children[0].child;
        break;
      case PropOutcome::HitObservation: {
        q = s.dfa.step(q, s.label_at(pr.x_end, e));
        int num_obs = s.obs_regions[pr.region].num_obs();
        double r = unit(rng), cum = 0.0;
        int o = num_obs - 1;
        for (int cand = 0; cand < num_obs; ++cand) {
          cum += s.obs_likelihood(pr.x_end, pr.region, e, n.belief.memory, cand);
          if (r <= cum) {
            o = cand;
            break;
          }
        }
        if (trace) trace->events.push_back({"observe", pr.region, o, pr.t_actual});
        for (const auto& c : n.children)
          if (c.obs == o) next = c.child;
        break;
      }
      case PropOutcome::Collided:
      case PropOutcome::LeftBounds:
        if (s.obstacle_in_task) q = s.dfa.step(q, s.obstacle_symbol());
        if (trace) trace->events.push_back({"crash", -1, -1, pr.t_actual});
        return !s.dfa.trap[q] && s.dfa.accepting[q];
    }
    // No stored continuation for this outcome: the policy is exhausted.
    if (next < 0) return false;
    node = next;
  }
}

}  // namespace

EvalReport execute_policy(const Scenario& s, const PolicyArtifact& policy, int trials,
                          std::uint64_t seed, std::vector<TrialTrace>* traces) {
  std::mt19937_64 rng(seed);
  EvalReport rep;
  rep.trials = trials;
  for (int t = 0; t < trials; ++t) {
    TrialTrace trace;
    bool ok = run_trial(s, policy, rng, traces ? &trace : nullptr);
    if (ok) ++rep.successes;
    if (traces) {
      trace.success = ok;
      traces->push_back(std::move(trace));
    }
  }
  rep.rate = trials > 0 ? static_cast<double>(rep.successes) / trials : 0.0;
  std::tie(rep.ci_low, rep.ci_high) = wilson_interval(rep.successes, trials);
  return rep;
}

namespace {

double exact_value_rec(const PolicyArtifact& policy, int node) {
  const PolicyNode& n = policy.nodes[node];
  if (!n.has_arm) return n.acc;
  double v = 0.0;
  for (const auto& c : n.children) v += c.w * exact_value_rec(policy, c.child);
  return v;
}

}  // namespace

double policy_success_exact(const PolicyArtifact& policy) {
  return exact_value_rec(policy, policy.root);
}

namespace {

/// Interior point of a geometry, padded with the tail of x0 to full state
/// dimension (velocities, fuel).
Eigen::VectorXd representative_point(const Scenario& s, const Geom& g) {
  Eigen::VectorXd x = s.x0;
  if (const Box* b = std::get_if<Box>(&g.shape)) {
    x.head(b->dim()) = 0.5 * (b->low + b->high);
  } else {
    const Ball& ball = std::get<Ball>(g.shape);
    x.head(ball.dim()) = ball.center;
  }
  return x;
}

/// Interior point of an observation region that avoids every semantic region,
/// so the idealized sense action does not also trigger their labels. Falls
/// back to the geometric center when the probing pattern finds none.
Eigen::VectorXd representative_obs_point(const Scenario& s, const Geom& g) {
  Eigen::VectorXd center = representative_point(s, g);
  int dims = g.dim();
  std::vector<Eigen::VectorXd> candidates{center};
  for (int frac = 1; frac <= 7; ++frac) {
    for (int d = 0; d < dims; ++d) {
      for (int sign : {1, -1}) {
        Eigen::VectorXd x = center;
        double scale = 0.0;
        if (const Box* b = std::get_if<Box>(&g.shape))
          scale = 0.5 * (b->high[d] - b->low[d]);
        else
          scale = std::get<Ball>(g.shape).radius;
        x[d] += sign * scale * frac / 8.0;
        candidates.push_back(std::move(x));
      }
    }
  }
  for (const auto& x : candidates) {
    if (!g.contains(x)) continue;
    bool clear = true;
    for (const auto& r : s.regions)
      if (r.geom.contains(x)) clear = false;
    if (clear) return x;
  }
  return center;
}

struct OracleKey {
  MemoryVector memory;
  int depth;
  std::vector<BeliefEntry> dist;

  bool operator<(const OracleKey& o) const {
    if (memory != o.memory) return memory < o.memory;
    if (depth != o.depth) return depth < o.depth;
    if (dist.size() != o.dist.size()) return dist.size() < o.dist.size();
    for (std::size_t i = 0; i < dist.size(); ++i) {
      if (dist[i].q != o.dist[i].q) return dist[i].q < o.dist[i].q;
      if (dist[i].hyp != o.dist[i].hyp) return dist[i].hyp < o.dist[i].hyp;
      if (dist[i].p != o.dist[i].p) return dist[i].p < o.dist[i].p;
    }
    return false;
  }
};

class OracleSolver {
 public:
  explicit OracleSolver(const Scenario& s) : s_(s) {}

  double value(const HybridBelief& b, int depth) {
    double acc = b.acc_mass(s_.dfa);
    if (depth == 0 || b.trap_mass(s_.dfa) == 1.0 || acc == 1.0) return acc;
    OracleKey key{b.memory, depth, b.dist};
    auto it = memo_.find(key);
    if (it != memo_.end()) return it->second;

    double best = acc;
    for (const auto& region : s_.regions) {
      HybridBelief at = b;
      at.x = representative_point(s_, region.geom);
      best = std::max(best, value(region_jump(s_, at), depth - 1));
    }
    for (std::size_t i = 0; i < s_.obs_regions.size(); ++i) {
      if ((b.memory >> i) & 1u) continue;
      HybridBelief at = b;
      at.x = representative_obs_point(s_, s_.obs_regions[i].geom);
      double ev = 0.0;
      for (const auto& oc : observation_outcomes(s_, at, static_cast<int>(i)))
        ev += oc.prob * value(oc.belief, depth - 1);
      best = std::max(best, ev);
    }
    memo_.emplace(std::move(key), best);
    return best;
  }

 private:
  const Scenario& s_;
  std::map<OracleKey, double> memo_;
};

}  // namespace

double oracle_optimal_value(const Scenario& s, int max_events) {
  OracleSolver solver(s);
  return solver.value(initial_belief(s), max_events);
}

int first_committed_region(const PolicyArtifact& policy) {
  int node = policy.root;
  while (true) {
    const PolicyNode& n = policy.nodes[node];
    if (!n.has_arm || n.children.empty()) return -1;
    MemoryVector before = n.belief.memory;
    MemoryVector after = policy.nodes[n.children[0].child].belief.memory;
    if (after != before) {
      MemoryVector diff = after & ~before;
      for (int bit = 0; bit < 32; ++bit)
        if ((diff >> bit) & 1u) return bit;
    }
    node = n.children[0].child;
  }
}

std::vector<int> observed_targets(const Scenario& s, const PolicyArtifact& policy) {
  MemoryVector seen = 0;
  for (const auto& n : policy.nodes) seen |= n.belief.memory;
  seen &= ~s.m0;
  std::vector<int> out;
  for (std::size_t i = 0; i < s.obs_regions.size(); ++i)
    if ((seen >> i) & 1u) out.push_back(static_cast<int>(i));
  return out;
}

std::string convergence_report(const std::vector<PlanReport>& reports) {
  std::ostringstream out;
  out << "scenario,algorithm,seed,iteration,time,value\n";
  for (const auto& r : reports)
    for (const auto& a : r.anytime)
      out << r.scenario_name << ',' << r.algorithm << ',' << r.seed << ',' << a.iteration << ','
          << a.time << ',' << a.value << '\n';
  return out.str();
}

}  // namespace sabpi
