#pragma once

#include <string>
#include <vector>

#include "sabpi/ltlf.hpp"

#include <nlohmann/json_fwd.hpp>

namespace sabpi {

struct DfaLimits {
  int max_states = 4096;
  int max_next_vars = 14;  // residual variables tracked during translation
};

struct DfaBudgetError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Minimized DFA over the alphabet 2^AP. The transition table is dense,
/// indexed by state * 2^|AP| + symbol.
struct Dfa {
  int num_states = 0;
  int num_aps = 0;
  int initial = 0;
  std::vector<int> transitions;
  std::vector<bool> accepting;
  /// States from which no accepting state is reachable; closed under
  /// transitions and disjoint from accepting.
  std::vector<bool> trap;

  int num_symbols() const { return 1 << num_aps; }

  int step(int q, ApSet symbol) const {
    return transitions[static_cast<std::size_t>(q) * num_symbols() + symbol];
  }

  /// Convention: the empty word is accepted iff the initial state is
  /// accepting.
  bool accepts(const Word& word) const {
    int q = initial;
    for (ApSet s : word) q = step(q, s);
    return accepting[q];
  }
};

/// Compiles an LTLf formula into a minimized DFA with trap annotation.
/// The construction progresses the formula symbol-by-symbol; residual states
/// are canonicalized as truth tables over the next-step subformulas, so the
/// result is deterministic by construction and then Moore-minimized.
Dfa compile_dfa(const LtlfFormula& f, int num_aps, const DfaLimits& limits = {});

nlohmann::json dfa_to_json(const Dfa& d, const std::vector<std::string>& ap);
std::string dfa_to_dot(const Dfa& d, const std::vector<std::string>& ap);

}  // namespace sabpi
