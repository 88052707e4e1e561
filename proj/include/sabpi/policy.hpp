#pragma once

#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "sabpi/tree.hpp"

namespace sabpi {

struct PolicyEdge {
  double w = 1.0;
  int obs = -1;
  int child = -1;
};

struct PolicyNode {
  HybridBelief belief;
  double value = 0.0;
  double acc = 0.0;
  bool has_arm = false;  // false: execution stops here
  Eigen::VectorXd u;
  double duration = 0.0;
  std::vector<PolicyEdge> children;
};

/// Serialized executable policy tree: a control choice per OR node plus the
/// outcome branching under it, with per-node beliefs and values for audit.
struct PolicyArtifact {
  std::string scenario_name;
  double root_value = 0.0;
  int root = 0;
  std::vector<PolicyNode> nodes;
};

/// Materializes the extracted subtree into a standalone artifact with
/// contiguous node ids.
PolicyArtifact extract_policy(const SearchTree& tree, const PolicySubtree& subtree,
                              const std::string& scenario_name);

nlohmann::json policy_to_json(const PolicyArtifact& p);
PolicyArtifact policy_from_json(const nlohmann::json& j);
void save_policy(const PolicyArtifact& p, const std::string& path);
PolicyArtifact load_policy_file(const std::string& path);

}  // namespace sabpi
