#pragma once

#include <unordered_map>
#include <vector>

#include "sabpi/belief.hpp"

namespace sabpi {

struct TreeEdge {
  double w = 1.0;  // outcome probability
  int obs = -1;    // observation symbol selecting this child, -1 otherwise
  int child = -1;
};

struct ControlArm {
  Eigen::VectorXd u;
  double duration = 0.0;
  int pulls = 0;
  double q = 0.0;  // sum of w * child value, in child order
  std::vector<TreeEdge> children;
  // Bandit statistics for rollout-based search (MCTS); unused by the exact
  // value machinery.
  double rollout_sum = 0.0;
  int rollout_count = 0;
};

struct TreeNode {
  HybridBelief belief;
  double acc = 0.0;   // accepting mass of the belief
  double trap = 0.0;  // trap mass of the belief
  double value = 0.0;
  int visits = 0;
  int parent = -1;
  int parent_arm = -1;
  bool solved = false;  // value reached its cap 1 - trap: frozen
  bool doomed = false;  // all mass trapped: never selected for expansion
  // Nearest ancestor-or-self that is an observation outcome (its own id for
  // outcome nodes), -1 outside any observation branch. Lets planners keep
  // growing unfinished outcome branches across iterations.
  int branch = -1;
  std::vector<ControlArm> arms;

  bool expandable() const { return !solved && !doomed; }
};

/// One chosen control arm per reachable OR node, closed under outcome
/// branching. choice maps node id -> arm index; nodes without an entry are
/// leaves of the policy (execution stops there).
struct PolicySubtree {
  int root = -1;
  std::vector<int> nodes;
  std::unordered_map<int, int> choice;
};

/// Arena-indexed AND/OR search tree with exact value backpropagation.
/// A node's value is max(accepting mass, max over arms of Q); arm Q is the
/// probability-weighted sum of child values. Mutated by a single planning
/// thread.
class SearchTree {
 public:
  explicit SearchTree(const Dfa* dfa) : dfa_(dfa) {}

  int add_root(HybridBelief belief);
  int new_arm(int node, Eigen::VectorXd u, double duration);
  /// Creates a child node under (parent, arm) and returns its id. Does not
  /// backpropagate; call backpropagate(parent) after adding a batch.
  int add_child(int parent, int arm, double w, int obs, HybridBelief belief);

  /// Recomputes arm Q and node value from `node` up to the root, early-exiting
  /// when a node's value and flags are unchanged. Bit-identical to a full
  /// bottom-up recomputation.
  void backpropagate(int node);

  /// One-level value recomputation, shared with backpropagate: folds the
  /// accepting mass with every arm's Q in index order.
  double recompute_value(int node) const;

  const TreeNode& node(int id) const { return nodes_[id]; }
  TreeNode& node(int id) { return nodes_[id]; }
  std::size_t size() const { return nodes_.size(); }
  const Dfa& dfa() const { return *dfa_; }

 private:
  const Dfa* dfa_;
  std::vector<TreeNode> nodes_;
};

/// UCB1 score for an arm: Q + c * sqrt(2 ln N / pulls). Unvisited arms score
/// +infinity.
double ucb_score(const TreeNode& n, const ControlArm& arm, double c);

/// Recursive policy-subtree selection: at each OR node pick the argmax-UCB
/// arm (ties: lowest arm index) and descend into every child of that arm.
/// With c > 0 this increments node visit counts and the chosen arms' pull
/// counts; with c = 0 it is a read-only pure-exploitation extraction, which
/// stops at a node whenever its own accepting mass beats every arm.
PolicySubtree ucb_st(SearchTree& tree, int root, double c);

}  // namespace sabpi
