#include "sabpi/tree.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace sabpi {

namespace {

/// Non-trap mass caps a node's value at 1 - trap; once reached, no expansion
/// can improve it and the node is frozen.
bool value_saturated(double value, double trap) { return value + trap >= 1.0 - 1e-12; }

}  // namespace

int SearchTree::add_root(HybridBelief belief) {
  if (!nodes_.empty()) throw std::logic_error("tree already has a root");
  TreeNode n;
  n.acc = belief.acc_mass(*dfa_);
  n.trap = belief.trap_mass(*dfa_);
  n.belief = std::move(belief);
  n.value = n.acc;
  n.solved = value_saturated(n.value, n.trap);
  n.doomed = n.trap == 1.0;
  nodes_.push_back(std::move(n));
  return 0;
}

int SearchTree::new_arm(int node, Eigen::VectorXd u, double duration) {
  ControlArm arm;
  arm.u = std::move(u);
  arm.duration = duration;
  arm.pulls = 1;
  nodes_[node].arms.push_back(std::move(arm));
  return static_cast<int>(nodes_[node].arms.size() - 1);
}

int SearchTree::add_child(int parent, int arm, double w, int obs, HybridBelief belief) {
  TreeNode n;
  n.acc = belief.acc_mass(*dfa_);
  n.trap = belief.trap_mass(*dfa_);
  n.belief = std::move(belief);
  n.value = n.acc;
  n.solved = value_saturated(n.value, n.trap);
  n.doomed = n.trap == 1.0;
  n.parent = parent;
  n.parent_arm = arm;
  int id = static_cast<int>(nodes_.size());
  n.branch = obs >= 0 ? id : nodes_[parent].branch;
  nodes_.push_back(std::move(n));
  nodes_[parent].arms[arm].children.push_back({w, obs, id});
  return id;
}

double SearchTree::recompute_value(int id) const {
  const TreeNode& n = nodes_[id];
  double v = n.acc;
  for (const auto& arm : n.arms) {
    double q = 0.0;
    for (const auto& e : arm.children) q += e.w * nodes_[e.child].value;
    if (q > v) v = q;
  }
  return v;
}

void SearchTree::backpropagate(int id) {
  while (id >= 0) {
    TreeNode& n = nodes_[id];
    for (auto& arm : n.arms) {
      double q = 0.0;
      for (const auto& e : arm.children) q += e.w * nodes_[e.child].value;
      arm.q = q;
    }
    double v = recompute_value(id);
    bool solved = value_saturated(v, n.trap);
    if (v == n.value && solved == n.solved) return;
    n.value = v;
    n.solved = solved;
    id = n.parent;
  }
}

double ucb_score(const TreeNode& n, const ControlArm& arm, double c) {
  if (c == 0.0) return arm.q;
  // Arms are created with exact Q values, so an unpulled arm needs no forced
  // pull; it just keeps the full exploration bonus.
  double visits = static_cast<double>(std::max(n.visits, 1));
  double pulls = static_cast<double>(std::max(arm.pulls, 1));
  return arm.q + c * std::sqrt(2.0 * std::log(visits) / pulls);
}

namespace {

void ucb_st_visit(SearchTree& tree, int id, double c, PolicySubtree& out) {
  out.nodes.push_back(id);
  TreeNode& n = tree.node(id);
  if (c > 0.0) ++n.visits;
  if (n.arms.empty()) return;

  int best = -1;
  double best_score = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n.arms.size(); ++i) {
    if (n.arms[i].children.empty() && c == 0.0) continue;  // degenerate arm: not executable
    double score = ucb_score(n, n.arms[i], c);
    if (score > best_score) {
      best_score = score;
      best = static_cast<int>(i);
    }
  }
  if (best < 0) return;
  if (c == 0.0 && n.acc >= n.arms[best].q) return;  // stopping here is at least as good
  out.choice[id] = best;
  for (const auto& e : n.arms[best].children) ucb_st_visit(tree, e.child, c, out);
}

}  // namespace

PolicySubtree ucb_st(SearchTree& tree, int root, double c) {
  PolicySubtree out;
  out.root = root;
  ucb_st_visit(tree, root, c, out);
  if (c > 0.0)
    for (const auto& [id, arm] : out.choice) ++tree.node(id).arms[arm].pulls;
  return out;
}

}  // namespace sabpi
