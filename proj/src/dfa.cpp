#include "sabpi/dfa.hpp"

#include <algorithm>
#include <cstdint>
#include <deque>
#include <map>
#include <unordered_map>

#include <nlohmann/json.hpp>

namespace sabpi {

namespace {

// Truth table over assignments to the next-step variables, one bit per
// assignment, little-endian across 64-bit words.
using Table = std::vector<std::uint64_t>;

struct Translator {
  std::vector<LtlfFormula> vars;
  std::unordered_map<std::string, int> var_index;
  int num_vars = 0;
  std::size_t num_assign = 0;
  std::size_t words = 0;

  void collect_vars(const LtlfFormula& f) {
    if (f.op == LtlfOp::Next) add_var(f.children[0]);
    if (f.op == LtlfOp::Until) add_var(f);
    for (const auto& c : f.children) collect_vars(c);
  }

  void add_var(const LtlfFormula& f) {
    std::string key = structural_key(f);
    if (var_index.count(key)) return;
    var_index.emplace(std::move(key), static_cast<int>(vars.size()));
    vars.push_back(f);
  }

  Table const_table(bool v) const {
    Table t(words, v ? ~0ull : 0ull);
    if (v) mask_tail(t);
    return t;
  }

  void mask_tail(Table& t) const {
    std::size_t rem = num_assign % 64;
    if (rem) t.back() &= (1ull << rem) - 1;
  }

  Table var_table(int i) const {
    Table t(words, 0);
    for (std::size_t a = 0; a < num_assign; ++a)
      if ((a >> i) & 1u) t[a / 64] |= 1ull << (a % 64);
    return t;
  }

  static void or_into(Table& a, const Table& b) {
    for (std::size_t i = 0; i < a.size(); ++i) a[i] |= b[i];
  }
  static void and_into(Table& a, const Table& b) {
    for (std::size_t i = 0; i < a.size(); ++i) a[i] &= b[i];
  }
  void not_into(Table& a) const {
    for (auto& w : a) w = ~w;
    mask_tail(a);
  }

  // Residual of f after reading `symbol`, as a boolean function of the
  // next-step variables.
  Table progress(const LtlfFormula& f, ApSet symbol) const {
    switch (f.op) {
      case LtlfOp::True:
        return const_table(true);
      case LtlfOp::Atom:
        return const_table((symbol >> f.atom_index) & 1u);
      case LtlfOp::Not: {
        Table t = progress(f.children[0], symbol);
        not_into(t);
        return t;
      }
      case LtlfOp::Or: {
        Table t = progress(f.children[0], symbol);
        or_into(t, progress(f.children[1], symbol));
        return t;
      }
      case LtlfOp::Next:
        return var_table(var_index.at(structural_key(f.children[0])));
      case LtlfOp::Until: {
        Table hold = progress(f.children[0], symbol);
        and_into(hold, var_table(var_index.at(structural_key(f))));
        Table t = progress(f.children[1], symbol);
        or_into(t, hold);
        return t;
      }
      default:
        throw std::logic_error("progress: formula not in core grammar");
    }
  }
};

std::vector<bool> reaches_accepting(const Dfa& d) {
  std::vector<std::vector<int>> rev(d.num_states);
  for (int q = 0; q < d.num_states; ++q)
    for (int s = 0; s < d.num_symbols(); ++s) rev[d.step(q, s)].push_back(q);
  std::vector<bool> reach(d.num_states, false);
  std::deque<int> queue;
  for (int q = 0; q < d.num_states; ++q)
    if (d.accepting[q]) {
      reach[q] = true;
      queue.push_back(q);
    }
  while (!queue.empty()) {
    int q = queue.front();
    queue.pop_front();
    for (int p : rev[q])
      if (!reach[p]) {
        reach[p] = true;
        queue.push_back(p);
      }
  }
  return reach;
}

Dfa minimize(const Dfa& d) {
  const int ns = d.num_symbols();
  std::vector<int> cls(d.num_states);
  for (int q = 0; q < d.num_states; ++q) cls[q] = d.accepting[q] ? 1 : 0;
  int num_classes = 2;
  for (;;) {
    std::map<std::vector<int>, int> sig_map;
    std::vector<int> next_cls(d.num_states);
    for (int q = 0; q < d.num_states; ++q) {
      std::vector<int> sig;
      sig.reserve(ns + 1);
      sig.push_back(cls[q]);
      for (int s = 0; s < ns; ++s) sig.push_back(cls[d.step(q, s)]);
      auto [it, inserted] = sig_map.emplace(std::move(sig), static_cast<int>(sig_map.size()));
      next_cls[q] = it->second;
    }
    if (static_cast<int>(sig_map.size()) == num_classes) break;
    num_classes = static_cast<int>(sig_map.size());
    cls = std::move(next_cls);
  }

  Dfa out;
  out.num_aps = d.num_aps;
  out.num_states = num_classes;
  out.initial = cls[d.initial];
  out.transitions.assign(static_cast<std::size_t>(num_classes) * ns, -1);
  out.accepting.assign(num_classes, false);
  for (int q = 0; q < d.num_states; ++q) {
    out.accepting[cls[q]] = d.accepting[q];
    for (int s = 0; s < ns; ++s)
      out.transitions[static_cast<std::size_t>(cls[q]) * ns + s] = cls[d.step(q, s)];
  }
  auto reach = reaches_accepting(out);
  out.trap.assign(num_classes, false);
  for (int q = 0; q < num_classes; ++q) out.trap[q] = !reach[q];
  return out;
}

}  // namespace

Dfa compile_dfa(const LtlfFormula& f, int num_aps, const DfaLimits& limits) {
  if (num_aps < 0 || num_aps > 16)
    throw std::invalid_argument("compile_dfa: |AP| must be in [0, 16]");
  LtlfFormula core = normalize(f);

  Translator tr;
  tr.add_var(core);  // the initial state is "word is nonempty and satisfies f"
  tr.collect_vars(core);
  tr.num_vars = static_cast<int>(tr.vars.size());
  if (tr.num_vars > limits.max_next_vars)
    throw DfaBudgetError("compile_dfa: formula requires " + std::to_string(tr.num_vars) +
                         " residual variables, cap is " + std::to_string(limits.max_next_vars));
  tr.num_assign = 1ull << tr.num_vars;
  tr.words = (tr.num_assign + 63) / 64;

  const int ns = 1 << num_aps;
  if (tr.num_assign * static_cast<std::size_t>(ns) > (1ull << 26))
    throw DfaBudgetError("compile_dfa: translation table budget exceeded");

  // Per symbol, the assignment remap: the residual of state B after symbol a
  // is B'(alpha) = B(beta_a(alpha)), where beta_a substitutes each variable
  // with its progressed table.
  std::vector<std::vector<std::uint32_t>> beta(ns);
  for (int a = 0; a < ns; ++a) {
    std::vector<Table> prog(tr.num_vars);
    for (int i = 0; i < tr.num_vars; ++i) prog[i] = tr.progress(tr.vars[i], static_cast<ApSet>(a));
    beta[a].assign(tr.num_assign, 0);
    for (std::size_t alpha = 0; alpha < tr.num_assign; ++alpha) {
      std::uint32_t b = 0;
      for (int i = 0; i < tr.num_vars; ++i)
        b |= static_cast<std::uint32_t>((prog[i][alpha / 64] >> (alpha % 64)) & 1u) << i;
      beta[a][alpha] = b;
    }
  }

  auto get_bit = [](const Table& t, std::size_t i) -> bool { return (t[i / 64] >> (i % 64)) & 1u; };

  std::map<Table, int> state_ids;
  std::vector<Table> states;
  Dfa raw;
  raw.num_aps = num_aps;

  Table init = tr.var_table(0);
  state_ids.emplace(init, 0);
  states.push_back(std::move(init));
  std::deque<int> frontier{0};
  std::vector<std::vector<int>> trans;
  while (!frontier.empty()) {
    int q = frontier.front();
    frontier.pop_front();
    if (q >= static_cast<int>(trans.size())) trans.resize(q + 1);
    trans[q].assign(ns, -1);
    Table table = states[q];  // copy: states may reallocate below
    for (int a = 0; a < ns; ++a) {
      Table next(tr.words, 0);
      for (std::size_t alpha = 0; alpha < tr.num_assign; ++alpha)
        if (get_bit(table, beta[a][alpha])) next[alpha / 64] |= 1ull << (alpha % 64);
      auto [it, inserted] = state_ids.emplace(std::move(next), static_cast<int>(states.size()));
      if (inserted) {
        if (static_cast<int>(states.size()) >= limits.max_states)
          throw DfaBudgetError("compile_dfa: state budget exceeded (" +
                               std::to_string(limits.max_states) + ")");
        states.push_back(it->first);
        frontier.push_back(it->second);
      }
      trans[q][a] = it->second;
    }
  }

  raw.num_states = static_cast<int>(states.size());
  raw.initial = 0;
  raw.transitions.assign(static_cast<std::size_t>(raw.num_states) * ns, -1);
  raw.accepting.assign(raw.num_states, false);
  for (int q = 0; q < raw.num_states; ++q) {
    raw.accepting[q] = get_bit(states[q], 0);  // all next-vars false: word ends here
    for (int a = 0; a < ns; ++a) raw.transitions[static_cast<std::size_t>(q) * ns + a] = trans[q][a];
  }

  return minimize(raw);
}

nlohmann::json dfa_to_json(const Dfa& d, const std::vector<std::string>& ap) {
  nlohmann::json j;
  j["ap"] = ap;
  j["num_states"] = d.num_states;
  j["initial"] = d.initial;
  nlohmann::json trans = nlohmann::json::object();
  for (int q = 0; q < d.num_states; ++q) {
    nlohmann::json row = nlohmann::json::object();
    for (int s = 0; s < d.num_symbols(); ++s) row[std::to_string(s)] = d.step(q, s);
    trans[std::to_string(q)] = std::move(row);
  }
  j["transitions"] = std::move(trans);
  nlohmann::json acc = nlohmann::json::array(), trap = nlohmann::json::array();
  for (int q = 0; q < d.num_states; ++q) {
    if (d.accepting[q]) acc.push_back(q);
    if (d.trap[q]) trap.push_back(q);
  }
  j["accepting"] = std::move(acc);
  j["trap"] = std::move(trap);
  return j;
}

std::string dfa_to_dot(const Dfa& d, const std::vector<std::string>& ap) {
  std::string out = "digraph dfa {\n  rankdir=LR;\n";
  for (int q = 0; q < d.num_states; ++q) {
    out += "  q" + std::to_string(q) + " [shape=" +
           (d.accepting[q] ? std::string("doublecircle") : std::string("circle"));
    if (d.trap[q]) out += ", style=dashed";
    out += "];\n";
  }
  out += "  init [shape=point]; init -> q" + std::to_string(d.initial) + ";\n";
  for (int q = 0; q < d.num_states; ++q) {
    for (int s = 0; s < d.num_symbols(); ++s) {
      std::string label = "{";
      for (std::size_t i = 0; i < ap.size(); ++i)
        if ((s >> i) & 1) label += (label.size() > 1 ? "," : "") + ap[i];
      label += "}";
      out += "  q" + std::to_string(q) + " -> q" + std::to_string(d.step(q, s)) +
             " [label=\"" + label + "\"];\n";
    }
  }
  out += "}\n";
  return out;
}

}  // namespace sabpi
