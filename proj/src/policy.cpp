#include "sabpi/policy.hpp"

#include <fstream>
#include <unordered_map>

#include <nlohmann/json.hpp>

namespace sabpi {

using nlohmann::json;

PolicyArtifact extract_policy(const SearchTree& tree, const PolicySubtree& subtree,
                              const std::string& scenario_name) {
  PolicyArtifact out;
  out.scenario_name = scenario_name;
  out.root_value = tree.node(subtree.root).value;

  std::unordered_map<int, int> remap;
  for (int id : subtree.nodes) {
    remap.emplace(id, static_cast<int>(out.nodes.size()));
    out.nodes.emplace_back();
  }
  out.root = remap.at(subtree.root);
  for (int id : subtree.nodes) {
    const TreeNode& n = tree.node(id);
    PolicyNode& p = out.nodes[remap.at(id)];
    p.belief = n.belief;
    p.value = n.value;
    p.acc = n.acc;
    auto it = subtree.choice.find(id);
    if (it == subtree.choice.end()) continue;
    const ControlArm& arm = n.arms[it->second];
    p.has_arm = true;
    p.u = arm.u;
    p.duration = arm.duration;
    for (const auto& e : arm.children) p.children.push_back({e.w, e.obs, remap.at(e.child)});
  }
  return out;
}

namespace {

json vec_to_json(const Eigen::VectorXd& v) {
  json a = json::array();
  for (int i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

Eigen::VectorXd vec_from_json(const json& a) {
  Eigen::VectorXd v(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) v[i] = a[i].get<double>();
  return v;
}

}  // namespace

json policy_to_json(const PolicyArtifact& p) {
  json j;
  j["scenario"] = p.scenario_name;
  j["root_value"] = p.root_value;
  j["root"] = p.root;
  json nodes = json::array();
  for (const auto& n : p.nodes) {
    json nj;
    nj["x"] = vec_to_json(n.belief.x);
    nj["memory"] = n.belief.memory;
    json dist = json::array();
    for (const auto& e : n.belief.dist) dist.push_back({e.q, e.hyp, e.p});
    nj["dist"] = std::move(dist);
    nj["value"] = n.value;
    nj["acc"] = n.acc;
    if (n.has_arm) {
      nj["u"] = vec_to_json(n.u);
      nj["duration"] = n.duration;
      json children = json::array();
      for (const auto& e : n.children)
        children.push_back({{"w", e.w}, {"obs", e.obs}, {"child", e.child}});
      nj["children"] = std::move(children);
    }
    nodes.push_back(std::move(nj));
  }
  j["nodes"] = std::move(nodes);
  return j;
}

PolicyArtifact policy_from_json(const json& j) {
  PolicyArtifact p;
  p.scenario_name = j.value("scenario", "");
  p.root_value = j.at("root_value").get<double>();
  p.root = j.at("root").get<int>();
  for (const auto& nj : j.at("nodes")) {
    PolicyNode n;
    n.belief.x = vec_from_json(nj.at("x"));
    n.belief.memory = nj.at("memory").get<MemoryVector>();
    for (const auto& e : nj.at("dist"))
      n.belief.dist.push_back({e[0].get<int>(), e[1].get<int>(), e[2].get<double>()});
    n.value = nj.at("value").get<double>();
    n.acc = nj.at("acc").get<double>();
    if (nj.contains("u")) {
      n.has_arm = true;
      n.u = vec_from_json(nj["u"]);
      n.duration = nj.at("duration").get<double>();
      for (const auto& e : nj.at("children"))
        n.children.push_back({e.at("w").get<double>(), e.at("obs").get<int>(), e.at("child").get<int>()});
    }
    p.nodes.push_back(std::move(n));
  }
  return p;
}

void save_policy(const PolicyArtifact& p, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write policy file " + path);
  out << policy_to_json(p).dump(2) << "\n";
}

PolicyArtifact load_policy_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open policy file " + path);
  json j;
  in >> j;
  return policy_from_json(j);
}

}  // namespace sabpi
