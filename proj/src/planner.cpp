#include "sabpi/planner.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "sabpi/belief.hpp"

namespace sabpi {

Algorithm algorithm_from_string(const std::string& name) {
  if (name == "sabpi") return Algorithm::Sabpi;
  if (name == "rrt") return Algorithm::Rrt;
  if (name == "mcts-pw") return Algorithm::MctsPw;
  throw std::invalid_argument("unknown algorithm '" + name + "'");
}

std::string to_string(Algorithm a) {
  switch (a) {
    case Algorithm::Sabpi:
      return "sabpi";
    case Algorithm::Rrt:
      return "rrt";
    case Algorithm::MctsPw:
      return "mcts-pw";
  }
  return "?";
}

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

Eigen::VectorXd sample_control(const Scenario& s, std::mt19937_64& rng) {
  Eigen::VectorXd u(s.control_box.dim());
  for (int i = 0; i < u.size(); ++i) {
    std::uniform_real_distribution<double> d(s.control_box.low[i], s.control_box.high[i]);
    u[i] = d(rng);
  }
  return u;
}

double sample_duration(const Scenario& s, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> d(0.0, s.t_prop_max);
  double t = d(rng);
  return t > 0.0 ? t : s.t_prop_max;
}

/// Loop bookkeeping shared by all three planners.
struct RunState {
  Clock::time_point t0 = Clock::now();
  long iterations = 0;
  double last_value = -1.0;
  std::vector<AnytimeSample> anytime;

  void record(const SearchTree& tree, int root) {
    double v = tree.node(root).value;
    if (v != last_value) {
      last_value = v;
      anytime.push_back({iterations, seconds_since(t0), v});
    }
  }

  bool exhausted(const SearchTree& tree, int root, const PlannerConfig& cfg) const {
    if (tree.node(root).value >= cfg.success_threshold) return true;
    if (cfg.max_iterations >= 0 && iterations >= cfg.max_iterations) return true;
    if (static_cast<long>(tree.size()) >= cfg.max_nodes) return true;
    return seconds_since(t0) >= cfg.time_limit;
  }
};

PlanResult finish(const Scenario& s, const PlannerConfig& cfg, SearchTree& tree, int root,
                  RunState& rs) {
  rs.record(tree, root);
  PolicySubtree best = ucb_st(tree, root, 0.0);
  PlanResult out;
  out.policy = extract_policy(tree, best, s.name);
  out.report.scenario_name = s.name;
  out.report.algorithm = to_string(cfg.algorithm);
  out.report.seed = cfg.seed;
  out.report.root_value = tree.node(root).value;
  out.report.iterations = rs.iterations;
  out.report.node_count = static_cast<long>(tree.size());
  out.report.root_arms = static_cast<long>(tree.node(root).arms.size());
  out.report.wall_time = seconds_since(rs.t0);
  out.report.anytime = std::move(rs.anytime);
  return out;
}

/// Grid-bucketed nearest-neighbor index over the position components of node
/// states. Non-expandable entries are pruned lazily during queries.
class PositionGrid {
 public:
  PositionGrid(const Scenario& s, int cells_per_dim = 32)
      : dims_(s.dynamics.position_dims), cells_(cells_per_dim) {
    low_ = s.state_box.low.head(dims_);
    Eigen::VectorXd span = (s.state_box.high.head(dims_) - low_).cwiseMax(1e-12);
    inv_cell_ = Eigen::VectorXd::Constant(dims_, cells_).cwiseQuotient(span);
    min_cell_width_ = span.minCoeff() / cells_;
    int total = 1;
    for (int i = 0; i < dims_; ++i) total *= cells_;
    buckets_.resize(total);
  }

  void insert(int id, const Eigen::VectorXd& x) { buckets_[cell_of(x)].push_back(id); }

  /// Closest expandable node to position p, or -1 when the index is empty.
  int nearest(SearchTree& tree, const Eigen::VectorXd& p) {
    std::vector<int> coord = coords_of(p);
    int best = -1;
    double best_d2 = std::numeric_limits<double>::infinity();
    for (int ring = 0; ring < cells_; ++ring) {
      if (best >= 0) {
        double reach = (ring - 1) * min_cell_width_;
        if (reach > 0.0 && reach * reach > best_d2) break;
      }
      scan_ring(tree, coord, ring, p, best, best_d2);
    }
    return best;
  }

 private:
  std::vector<int> coords_of(const Eigen::VectorXd& p) const {
    std::vector<int> c(dims_);
    for (int i = 0; i < dims_; ++i)
      c[i] = std::clamp(static_cast<int>((p[i] - low_[i]) * inv_cell_[i]), 0, cells_ - 1);
    return c;
  }

  int flatten(const std::vector<int>& c) const {
    int idx = 0;
    for (int i = 0; i < dims_; ++i) idx = idx * cells_ + c[i];
    return idx;
  }

  int cell_of(const Eigen::VectorXd& x) const { return flatten(coords_of(x)); }

  void scan_bucket(SearchTree& tree, int idx, const Eigen::VectorXd& p, int& best,
                   double& best_d2) {
    auto& b = buckets_[idx];
    for (std::size_t i = 0; i < b.size();) {
      const TreeNode& n = tree.node(b[i]);
      if (!n.expandable()) {
        b[i] = b.back();
        b.pop_back();
        continue;
      }
      double d2 = (n.belief.x.head(dims_) - p).squaredNorm();
      if (d2 < best_d2) {
        best_d2 = d2;
        best = b[i];
      }
      ++i;
    }
  }

  /// Visits every cell at Chebyshev distance exactly `ring` from `center`.
  void scan_ring(SearchTree& tree, const std::vector<int>& center, int ring,
                 const Eigen::VectorXd& p, int& best, double& best_d2) {
    std::vector<int> c(dims_);
    scan_ring_rec(tree, center, ring, 0, false, c, p, best, best_d2);
  }

  void scan_ring_rec(SearchTree& tree, const std::vector<int>& center, int ring, int d,
                     bool on_shell, std::vector<int>& c, const Eigen::VectorXd& p, int& best,
                     double& best_d2) {
    if (d == dims_) {
      if (on_shell || ring == 0) scan_bucket(tree, flatten(c), p, best, best_d2);
      return;
    }
    int lo = std::max(0, center[d] - ring);
    int hi = std::min(cells_ - 1, center[d] + ring);
    for (int v = lo; v <= hi; ++v) {
      c[d] = v;
      bool shell = on_shell || std::abs(v - center[d]) == ring;
      // Interior cells were covered by smaller rings; only the last dimension
      // can still put the cell on the shell.
      if (!shell && d == dims_ - 1) continue;
      scan_ring_rec(tree, center, ring, d + 1, shell, c, p, best, best_d2);
    }
  }

  int dims_;
  int cells_;
  Eigen::VectorXd low_;
  Eigen::VectorXd inv_cell_;
  double min_cell_width_ = 0.0;
  std::vector<std::vector<int>> buckets_;
};

Eigen::VectorXd sample_position(const Scenario& s, std::mt19937_64& rng) {
  int d = s.dynamics.position_dims;
  Eigen::VectorXd p(d);
  for (int i = 0; i < d; ++i) {
    std::uniform_real_distribution<double> dist(s.state_box.low[i], s.state_box.high[i]);
    p[i] = dist(rng);
  }
  return p;
}

/// Tracks observation-outcome nodes whose branch has not yet reached any
/// accepting mass. Such a branch pins its arm's Q at a fraction of the true
/// value, and nothing inside it is reachable through exploitation until it
/// succeeds, so the planner keeps funding these branches directly.
class OpenBranches {
 public:
  void on_new_node(const SearchTree& tree, int id) {
    int b = tree.node(id).branch;
    if (b < 0) return;
    members_[b].push_back(id);
    if (b == id) open_.push_back(b);
  }

  /// An open branch to grow, favoring those with a succeeded sibling outcome
  /// (completing them immediately lifts the shared arm's Q); -1 if none.
  int pick(SearchTree& tree, std::mt19937_64& rng) {
    std::vector<int> ready;
    for (std::size_t i = 0; i < open_.size();) {
      const TreeNode& n = tree.node(open_[i]);
      if (n.value > 0.0 || n.doomed) {
        open_[i] = open_.back();
        open_.pop_back();
        continue;
      }
      const TreeNode& parent = tree.node(n.parent);
      for (const auto& e : parent.arms[n.parent_arm].children)
        if (tree.node(e.child).value > 0.0) {
          ready.push_back(open_[i]);
          break;
        }
      ++i;
    }
    if (open_.empty()) return -1;
    const std::vector<int>& from = ready.empty() ? open_ : ready;
    std::uniform_int_distribution<std::size_t> d(0, from.size() - 1);
    return from[d(rng)];
  }

  const std::vector<int>& members(int branch) { return members_[branch]; }

 private:
  std::vector<int> open_;
  std::unordered_map<int, std::vector<int>> members_;
};

PlanResult sabpi_plan(const Scenario& s, const PlannerConfig& cfg) {
  std::mt19937_64 rng(cfg.seed);
  SearchTree tree(&s.dfa);
  int root = tree.add_root(initial_belief(s));
  RunState rs;
  rs.record(tree, root);
  OpenBranches open;

  while (!rs.exhausted(tree, root, cfg)) {
    ++rs.iterations;
    PolicySubtree sub = ucb_st(tree, root, cfg.c);
    std::vector<int> pool;
    for (int id : sub.nodes)
      if (tree.node(id).expandable()) pool.push_back(id);
    int funded = open.pick(tree, rng);
    if (funded >= 0)
      for (int id : open.members(funded))
        if (tree.node(id).expandable()) pool.push_back(id);
    if (pool.empty()) {
      // Selected subtree fully resolved below threshold: widen to any frontier.
      for (int id = 0; id < static_cast<int>(tree.size()); ++id)
        if (tree.node(id).expandable()) pool.push_back(id);
      if (pool.empty()) break;
    }

    for (int e = 0; e < cfg.k && !pool.empty(); ++e) {
      if (static_cast<long>(tree.size()) >= cfg.max_nodes) break;
      int pick = -1;
      // Unexpanded outcome branches first: the chosen subtree's Q is held down
      // by every leaf it still contains, so finishing those dominates.
      std::uniform_real_distribution<double> unit(0.0, 1.0);
      if (unit(rng) < 0.5) {
        std::vector<std::size_t> leaves;
        for (std::size_t i = 0; i < pool.size();) {
          const TreeNode& n = tree.node(pool[i]);
          if (!n.expandable()) {
            pool[i] = pool.back();
            pool.pop_back();
            continue;
          }
          if (n.arms.empty()) leaves.push_back(i);
          ++i;
        }
        if (!leaves.empty()) {
          std::uniform_int_distribution<std::size_t> d(0, leaves.size() - 1);
          pick = static_cast<int>(leaves[d(rng)]);
        }
      }
      if (pick >= 0) {
      } else if (cfg.voronoi_select) {
        Eigen::VectorXd target = sample_position(s, rng);
        double best_d2 = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < pool.size();) {
          const TreeNode& n = tree.node(pool[i]);
          if (!n.expandable()) {
            pool[i] = pool.back();
            pool.pop_back();
            continue;
          }
          double d2 = (n.belief.x.head(target.size()) - target).squaredNorm();
          if (d2 < best_d2) {
            best_d2 = d2;
            pick = static_cast<int>(i);
          }
          ++i;
        }
      } else {
        while (!pool.empty()) {
          std::uniform_int_distribution<std::size_t> d(0, pool.size() - 1);
          std::size_t i = d(rng);
          if (tree.node(pool[i]).expandable()) {
            pick = static_cast<int>(i);
            break;
          }
          pool[i] = pool.back();
          pool.pop_back();
        }
      }
      if (pick < 0) break;
      std::vector<int> kids = expand_node(tree, s, rng, pool[pick]);
      for (int kid : kids) {
        open.on_new_node(tree, kid);
        if (tree.node(kid).expandable()) pool.push_back(kid);
      }
      rs.record(tree, root);
      if (tree.node(root).value >= cfg.success_threshold) break;
    }
  }
  return finish(s, cfg, tree, root, rs);
}

PlanResult rrt_plan(const Scenario& s, const PlannerConfig& cfg) {
  std::mt19937_64 rng(cfg.seed);
  SearchTree tree(&s.dfa);
  int root = tree.add_root(initial_belief(s));
  RunState rs;
  rs.record(tree, root);
  PositionGrid grid(s);
  if (tree.node(root).expandable()) grid.insert(root, tree.node(root).belief.x);

  while (!rs.exhausted(tree, root, cfg)) {
    ++rs.iterations;
    int id = grid.nearest(tree, sample_position(s, rng));
    if (id < 0) break;
    std::vector<int> kids = expand_node(tree, s, rng, id);
    for (int kid : kids) {
      const TreeNode& n = tree.node(kid);
      if (n.expandable()) grid.insert(kid, n.belief.x);
    }
    rs.record(tree, root);
  }
  return finish(s, cfg, tree, root, rs);
}

/// Monte-Carlo rollout under random controls; returns the accepting mass of
/// the final belief. Does not touch the tree.
double rollout(const Scenario& s, std::mt19937_64& rng, HybridBelief b, int depth) {
  for (int step = 0; step < depth; ++step) {
    double acc = b.acc_mass(s.dfa);
    if (acc == 1.0 || b.trap_mass(s.dfa) == 1.0) return acc;
    Eigen::VectorXd u = sample_control(s, rng);
    PropagationResult pr = propagate(s, b.x, b.memory, u, sample_duration(s, rng));
    b.x = pr.x_end;
    switch (pr.outcome) {
      case PropOutcome::FullDuration:
        break;
      case PropOutcome::HitRegion:
        b = region_jump(s, b);
        break;
      case PropOutcome::HitObservation: {
        std::vector<ObsOutcome> outs = observation_outcomes(s, b, pr.region);
        std::uniform_real_distribution<double> d(0.0, 1.0);
        double r = d(rng), cum = 0.0;
        std::size_t pick = outs.size() - 1;
        for (std::size_t i = 0; i < outs.size(); ++i) {
          cum += outs[i].prob;
          if (r <= cum) {
            pick = i;
            break;
          }
        }
        b = std::move(outs[pick].belief);
        break;
      }
      case PropOutcome::Collided:
      case PropOutcome::LeftBounds:
        if (s.obstacle_in_task) b = symbol_jump(s, b, s.obstacle_symbol());
        return b.acc_mass(s.dfa);
    }
  }
  return b.acc_mass(s.dfa);
}

PlanResult mcts_pw_plan(const Scenario& s, const PlannerConfig& cfg) {
  std::mt19937_64 rng(cfg.seed);
  SearchTree tree(&s.dfa);
  int root = tree.add_root(initial_belief(s));
  RunState rs;
  rs.record(tree, root);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  while (!rs.exhausted(tree, root, cfg)) {
    ++rs.iterations;
    std::vector<std::pair<int, int>> path;  // (node, arm) pairs to credit
    double value = 0.0;
    int id = root;
    while (true) {
      TreeNode& n = tree.node(id);
      ++n.visits;
      if (!n.expandable()) {
        value = n.acc;
        break;
      }
      double allow = cfg.k_w * std::pow(static_cast<double>(n.visits), cfg.alpha_w);
      if (static_cast<double>(n.arms.size()) < allow &&
          static_cast<long>(tree.size()) < cfg.max_nodes) {
        std::vector<int> kids = expand_node(tree, s, rng, id);
        int arm = static_cast<int>(tree.node(id).arms.size()) - 1;
        path.push_back({id, arm});
        if (kids.empty()) {
          value = 0.0;  // degenerate arm: crash with no task consequence
        } else {
          const ControlArm& a = tree.node(id).arms[arm];
          double r = unit(rng), cum = 0.0;
          int child = a.children.back().child;
          for (const auto& e : a.children) {
            cum += e.w;
            if (r <= cum) {
              child = e.child;
              break;
            }
          }
          TreeNode& cn = tree.node(child);
          ++cn.visits;
          value = rollout(s, rng, cn.belief, cfg.rollout_depth);
        }
        break;
      }
      if (n.arms.empty()) {
        value = n.acc;
        break;
      }
      int best = 0;
      double best_score = -std::numeric_limits<double>::infinity();
      for (std::size_t i = 0; i < n.arms.size(); ++i) {
        const ControlArm& a = n.arms[i];
        double score = a.rollout_count == 0
                           ? std::numeric_limits<double>::infinity()
                           : a.rollout_sum / a.rollout_count +
                                 cfg.c * std::sqrt(2.0 * std::log(static_cast<double>(n.visits)) /
                                                   a.rollout_count);
        if (score > best_score) {
          best_score = score;
          best = static_cast<int>(i);
        }
      }
      path.push_back({id, best});
      const ControlArm& a = n.arms[best];
      if (a.children.empty()) {
        value = 0.0;
        break;
      }
      double r = unit(rng), cum = 0.0;
      int child = a.children.back().child;
      for (const auto& e : a.children) {
        cum += e.w;
        if (r <= cum) {
          child = e.child;
          break;
        }
      }
      id = child;
    }
    for (auto [nid, arm] : path) {
      ControlArm& a = tree.node(nid).arms[arm];
      a.rollout_sum += value;
      ++a.rollout_count;
    }
    rs.record(tree, root);
    if (static_cast<long>(tree.size()) >= cfg.max_nodes) break;
  }
  return finish(s, cfg, tree, root, rs);
}

}  // namespace

std::vector<int> expand_node(SearchTree& tree, const Scenario& s, std::mt19937_64& rng, int node) {
  Eigen::VectorXd u = sample_control(s, rng);
  double t_req = sample_duration(s, rng);
  // Copy: add_child below may reallocate the node arena.
  HybridBelief b = tree.node(node).belief;
  PropagationResult pr = propagate(s, b.x, b.memory, u, t_req);
  int arm = tree.new_arm(node, u, pr.t_actual);

  std::vector<int> kids;
  HybridBelief moved = b;
  moved.x = pr.x_end;
  switch (pr.outcome) {
    case PropOutcome::FullDuration:
      kids.push_back(tree.add_child(node, arm, 1.0, -1, std::move(moved)));
      break;
    case PropOutcome::HitRegion:
      kids.push_back(tree.add_child(node, arm, 1.0, -1, region_jump(s, moved)));
      break;
    case PropOutcome::HitObservation:
      for (auto& o : observation_outcomes(s, moved, pr.region))
        kids.push_back(tree.add_child(node, arm, o.prob, o.obs, std::move(o.belief)));
      break;
    case PropOutcome::Collided:
    case PropOutcome::LeftBounds:
      // Crash: dooms the task only when the formula mentions the obstacle
      // proposition; otherwise the arm stays childless with Q = 0.
      if (s.obstacle_in_task)
        kids.push_back(tree.add_child(node, arm, 1.0, -1, symbol_jump(s, moved, s.obstacle_symbol())));
      break;
  }
  tree.backpropagate(node);
  return kids;
}

PlanResult plan(const Scenario& s, const PlannerConfig& cfg) {
  switch (cfg.algorithm) {
    case Algorithm::Sabpi:
      return sabpi_plan(s, cfg);
    case Algorithm::Rrt:
      return rrt_plan(s, cfg);
    case Algorithm::MctsPw:
      return mcts_pw_plan(s, cfg);
  }
  throw std::logic_error("unreachable");
}

nlohmann::json report_to_json(const PlanReport& r) {
  nlohmann::json j;
  j["scenario"] = r.scenario_name;
  j["algorithm"] = r.algorithm;
  j["seed"] = r.seed;
  j["root_value"] = r.root_value;
  j["iterations"] = r.iterations;
  j["node_count"] = r.node_count;
  j["root_arms"] = r.root_arms;
  j["wall_time"] = r.wall_time;
  nlohmann::json curve = nlohmann::json::array();
  for (const auto& a : r.anytime)
    curve.push_back({{"iteration", a.iteration}, {"time", a.time}, {"value", a.value}});
  j["anytime"] = std::move(curve);
  return j;
}

}  // namespace sabpi
