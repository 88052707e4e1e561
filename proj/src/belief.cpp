#include "sabpi/belief.hpp"

#include <algorithm>
#include <map>
#include <stdexcept>

namespace sabpi {

namespace {

std::vector<BeliefEntry> normalize_entries(std::map<std::pair<int, int>, double>&& acc) {
  double total = 0.0;
  for (const auto& [key, p] : acc)
    if (p > kBeliefPruneEps) total += p;
  if (total <= 0.0) throw std::logic_error("belief update produced zero total mass");
  std::vector<BeliefEntry> out;
  out.reserve(acc.size());
  for (const auto& [key, p] : acc)
    if (p > kBeliefPruneEps) out.push_back({key.first, key.second, p / total});
  return out;
}

}  // namespace

double HybridBelief::acc_mass(const Dfa& dfa) const {
  double m = 0.0;
  for (const auto& e : dist)
    if (dfa.accepting[e.q]) m += e.p;
  return m;
}

double HybridBelief::trap_mass(const Dfa& dfa) const {
  double m = 0.0;
  for (const auto& e : dist)
    if (dfa.trap[e.q]) m += e.p;
  return m;
}

HybridBelief initial_belief(const Scenario& s) {
  HybridBelief b;
  b.x = s.x0;
  b.memory = s.m0;
  b.dist.reserve(s.hypotheses.size());
  for (std::size_t h = 0; h < s.hypotheses.size(); ++h)
    if (s.hypotheses[h].prior > kBeliefPruneEps)
      b.dist.push_back({s.dfa.initial, static_cast<int>(h), s.hypotheses[h].prior});
  std::sort(b.dist.begin(), b.dist.end(),
            [](const BeliefEntry& a, const BeliefEntry& c) {
              return std::tie(a.q, a.hyp) < std::tie(c.q, c.hyp);
            });
  return region_jump(s, b);  // the trace starts with the label of x0
}

HybridBelief region_jump(const Scenario& s, const HybridBelief& b) {
  std::map<std::pair<int, int>, double> acc;
  for (const auto& e : b.dist) {
    ApSet label = s.label_at(b.x, s.hypotheses[e.hyp].mask);
    acc[{s.dfa.step(e.q, label), e.hyp}] += e.p;
  }
  HybridBelief out;
  out.x = b.x;
  out.memory = b.memory;
  out.dist = normalize_entries(std::move(acc));
  return out;
}

HybridBelief symbol_jump(const Scenario& s, const HybridBelief& b, ApSet symbol) {
  std::map<std::pair<int, int>, double> acc;
  for (const auto& e : b.dist) acc[{s.dfa.step(e.q, symbol), e.hyp}] += e.p;
  HybridBelief out;
  out.x = b.x;
  out.memory = b.memory;
  out.dist = normalize_entries(std::move(acc));
  return out;
}

std::vector<ObsOutcome> observation_outcomes(const Scenario& s, const HybridBelief& b,
                                             int obs_region) {
  if ((b.memory >> obs_region) & 1u)
    throw std::logic_error("observation_outcomes called on an already-visited region");
  const int num_obs = s.obs_regions[obs_region].num_obs();
  MemoryVector m_next = memory_update(b.memory, obs_region);

  std::vector<ObsOutcome> out;
  for (int o = 0; o < num_obs; ++o) {
    // DFA jump first (the observation region may carry labels), then the
    // likelihood weighting.
    std::map<std::pair<int, int>, double> acc;
    double prob = 0.0;
    for (const auto& e : b.dist) {
      HypMask mask = s.hypotheses[e.hyp].mask;
      double z = s.obs_likelihood(b.x, obs_region, mask, b.memory, o);
      double w = z * e.p;
      if (w <= 0.0) continue;
      prob += w;
      ApSet label = s.label_at(b.x, mask);
      acc[{s.dfa.step(e.q, label), e.hyp}] += w;
    }
    if (prob <= kBeliefPruneEps) continue;
    ObsOutcome oc;
    oc.obs = o;
    oc.prob = prob;
    oc.belief.x = b.x;
    oc.belief.memory = m_next;
    oc.belief.dist = normalize_entries(std::move(acc));
    out.push_back(std::move(oc));
  }
  // Renormalize outcome probabilities after pruning.
  double total = 0.0;
  for (const auto& oc : out) total += oc.prob;
  for (auto& oc : out) oc.prob /= total;
  return out;
}

}  // namespace sabpi
