#include "sabpi/scenario.hpp"

#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace sabpi {

using nlohmann::json;

void DynamicsModel::derivative(const Eigen::VectorXd& x, const Eigen::VectorXd& u,
                               Eigen::VectorXd& dx) const {
  dx.setZero(state_dim);
  switch (kind) {
    case DynamicsKind::SingleIntegrator:
      dx.head(control_dim) = u;
      break;
    case DynamicsKind::SecondOrderCar:
      // state [x, y, theta, v], controls [accel, turn rate]
      dx[0] = x[3] * std::cos(x[2]);
      dx[1] = x[3] * std::sin(x[2]);
      dx[2] = u[1];
      dx[3] = u[0];
      break;
    case DynamicsKind::Quadcopter3D:
      // double integrator: state [p, v], control = acceleration
      dx.head(3) = x.segment(3, 3);
      dx.segment(3, 3) = u;
      break;
  }
  if (fuel) dx[fuel->dim] = -(fuel->idle_rate + fuel->control_rate * u.norm());
}

ApSet Scenario::label_at(const Eigen::VectorXd& x, HypMask e) const {
  ApSet labels = 0;
  for (const auto& r : regions) {
    if (!r.geom.contains(x)) continue;
    labels |= r.certain_labels;
    for (int bit : r.uncertain_bits)
      if ((e >> bit) & 1u) labels |= 1u << uncertain[bit].ap_index;
  }
  for (const auto& d : derived)
    for (int bit : d.bits)
      if ((e >> bit) & 1u) labels |= 1u << d.ap_index;
  if (dynamics.fuel && x[dynamics.fuel->dim] > 0.0) labels |= 1u << dynamics.fuel->ap_index;
  if (obstacle_ap >= 0 && in_obstacle(x)) labels |= 1u << obstacle_ap;
  return labels;
}

bool Scenario::in_obstacle(const Eigen::VectorXd& x) const {
  for (const auto& o : obstacles)
    if (o.contains(x)) return true;
  return false;
}

bool Scenario::in_bounds(const Eigen::VectorXd& x) const { return state_box.contains(x); }

bool Scenario::guard_R(const Eigen::VectorXd& x) const {
  for (const auto& r : regions)
    if (r.geom.contains(x)) return true;
  return false;
}

std::optional<int> Scenario::guard_T(const Eigen::VectorXd& x) const {
  for (std::size_t i = 0; i < obs_regions.size(); ++i)
    if (obs_regions[i].geom.contains(x)) return static_cast<int>(i);
  return std::nullopt;
}

int Scenario::hypothesis_row(int obs_region, HypMask e) const {
  const auto& r = obs_regions[obs_region];
  int row = 0;
  for (std::size_t j = 0; j < r.sensed_bits.size(); ++j)
    row |= static_cast<int>((e >> r.sensed_bits[j]) & 1u) << j;
  return row;
}

double Scenario::obs_likelihood(const Eigen::VectorXd& x, int obs_region, HypMask e,
                                MemoryVector m, int o) const {
  const auto& r = obs_regions[obs_region];
  if (o < 0 || o >= r.num_obs()) throw std::out_of_range("obs_likelihood: unknown observation symbol");
  (void)x;  // position dependence is modeled by distinct regions
  if ((m >> obs_region) & 1u) return 1.0 / r.num_obs();
  return r.table[hypothesis_row(obs_region, e)][o];
}

MemoryVector memory_update(MemoryVector m, int obs_region) { return m | (1u << obs_region); }

namespace {

Eigen::VectorXd to_vec(const json& j) {
  Eigen::VectorXd v(j.size());
  for (std::size_t i = 0; i < j.size(); ++i) v[i] = j[i].get<double>();
  return v;
}

Geom parse_geom(const json& j) {
  std::string type = j.at("type").get<std::string>();
  if (type == "box") {
    Box b{to_vec(j.at("low")), to_vec(j.at("high"))};
    if (b.low.size() != b.high.size() || (b.high - b.low).minCoeff() <= 0.0)
      throw std::invalid_argument("box geometry requires low < high per dimension");
    return Geom{b};
  }
  if (type == "ball") {
    Ball b{to_vec(j.at("center")), j.at("radius").get<double>()};
    if (b.radius <= 0.0) throw std::invalid_argument("ball geometry requires positive radius");
    return Geom{b};
  }
  throw std::invalid_argument("unknown geometry type '" + type + "'");
}

int ap_index_of(const std::vector<std::string>& ap, const std::string& name) {
  for (std::size_t i = 0; i < ap.size(); ++i)
    if (ap[i] == name) return static_cast<int>(i);
  throw std::invalid_argument("proposition '" + name + "' not in declared AP set");
}

}  // namespace

Scenario load_scenario(const json& j) {
  Scenario s;
  s.name = j.value("name", "");
  s.ap = j.at("ap").get<std::vector<std::string>>();
  if (s.ap.size() > 16) throw std::invalid_argument("at most 16 atomic propositions supported");

  const json& ws = j.at("workspace");
  s.state_box = Box{to_vec(ws.at("state_low")), to_vec(ws.at("state_high"))};
  s.control_box = Box{to_vec(ws.at("control_low")), to_vec(ws.at("control_high"))};
  if ((s.state_box.high - s.state_box.low).minCoeff() <= 0.0 ||
      (s.control_box.high - s.control_box.low).minCoeff() <= 0.0)
    throw std::invalid_argument("workspace boxes require low < high per dimension");

  const json& dyn = j.at("dynamics");
  std::string kind = dyn.at("type").get<std::string>();
  DynamicsModel& m = s.dynamics;
  if (kind == "single_integrator") {
    m.kind = DynamicsKind::SingleIntegrator;
    m.control_dim = static_cast<int>(s.control_box.low.size());
    m.position_dims = m.control_dim;
    m.state_dim = m.control_dim;
  } else if (kind == "second_order_car") {
    m.kind = DynamicsKind::SecondOrderCar;
    m.control_dim = 2;
    m.position_dims = 2;
    m.state_dim = 4;
  } else if (kind == "quadcopter_3d") {
    m.kind = DynamicsKind::Quadcopter3D;
    m.control_dim = 3;
    m.position_dims = 3;
    m.state_dim = 6;
  } else {
    throw std::invalid_argument("unknown dynamics type '" + kind + "'");
  }
  if (dyn.contains("fuel")) {
    FuelModel f;
    f.dim = m.state_dim;  // appended as the last state dimension
    m.state_dim += 1;
    f.idle_rate = dyn["fuel"].value("idle_rate", 0.0);
    f.control_rate = dyn["fuel"].value("control_rate", 0.0);
    f.ap_index = ap_index_of(s.ap, dyn["fuel"].at("prop").get<std::string>());
    m.fuel = f;
  }
  if (s.state_box.low.size() != m.state_dim)
    throw std::invalid_argument("state box dimension does not match dynamics state size");
  if (s.control_box.low.size() != m.control_dim)
    throw std::invalid_argument("control box dimension does not match dynamics control size");

  for (const auto& o : j.value("obstacles", json::array())) s.obstacles.push_back(parse_geom(o));

  std::map<std::string, int> region_ids;
  std::map<std::string, int> bit_ids;  // "region.prop" -> uncertain bit
  for (const auto& rj : j.value("regions", json::array())) {
    SemanticRegion r;
    r.id = rj.at("id").get<std::string>();
    r.geom = parse_geom(rj.at("geometry"));
    for (const auto& lbl : rj.value("labels", json::array()))
      r.certain_labels |= 1u << ap_index_of(s.ap, lbl.get<std::string>());
    int region_index = static_cast<int>(s.regions.size());
    for (const auto& up : rj.value("uncertain", json::array())) {
      std::string prop = up.get<std::string>();
      int api = ap_index_of(s.ap, prop);
      if (r.certain_labels & (1u << api))
        throw std::invalid_argument("region " + r.id + ": '" + prop + "' both certain and uncertain");
      int bit = static_cast<int>(s.uncertain.size());
      if (bit >= 32) throw std::invalid_argument("at most 32 uncertain (region, prop) pairs");
      s.uncertain.push_back(UncertainProp{region_index, api});
      bit_ids[r.id + "." + prop] = bit;
      r.uncertain_bits.push_back(bit);
    }
    if (region_ids.count(r.id)) throw std::invalid_argument("duplicate region id " + r.id);
    region_ids[r.id] = region_index;
    s.regions.push_back(std::move(r));
  }

  for (const auto& oj : j.value("observation_regions", json::array())) {
    ObservationRegion r;
    r.id = oj.at("id").get<std::string>();
    r.geom = parse_geom(oj.at("geometry"));
    auto it = region_ids.find(oj.at("target").get<std::string>());
    if (it == region_ids.end())
      throw std::invalid_argument("observation region " + r.id + ": unknown target region");
    r.target_region = it->second;
    if (oj.contains("senses")) {
      for (const auto& p : oj["senses"])
        r.sensed_bits.push_back(bit_ids.at(s.regions[r.target_region].id + "." + p.get<std::string>()));
    } else {
      r.sensed_bits = s.regions[r.target_region].uncertain_bits;
    }
    if (r.sensed_bits.empty())
      throw std::invalid_argument("observation region " + r.id + " senses nothing");
    int no = r.num_obs();
    if (oj.contains("table")) {
      r.table = oj["table"].get<std::vector<std::vector<double>>>();
    } else {
      double a = oj.at("accuracy").get<double>();
      r.table.assign(no, std::vector<double>(no, no > 1 ? (1.0 - a) / (no - 1) : 1.0));
      for (int h = 0; h < no; ++h) r.table[h][h] = a;
    }
    if (static_cast<int>(r.table.size()) != no)
      throw std::invalid_argument("observation table row count mismatch in " + r.id);
    for (const auto& row : r.table) {
      if (static_cast<int>(row.size()) != no)
        throw std::invalid_argument("observation table column count mismatch in " + r.id);
      double sum = 0.0;
      for (double p : row) sum += p;
      if (std::abs(sum - 1.0) > 1e-9)
        throw std::invalid_argument("observation table row does not sum to 1 in " + r.id);
    }
    if (s.obs_regions.size() >= 32) throw std::invalid_argument("at most 32 observation regions");
    s.obs_regions.push_back(std::move(r));
  }

  for (const auto& dj : j.value("derived_props", json::array())) {
    DerivedProp d;
    d.ap_index = ap_index_of(s.ap, dj.at("name").get<std::string>());
    for (const auto& pair : dj.at("any_of"))
      d.bits.push_back(bit_ids.at(pair[0].get<std::string>() + "." + pair[1].get<std::string>()));
    s.derived.push_back(std::move(d));
  }

  const json& prior = j.at("prior");
  std::size_t cap = j.value("hypothesis_cap", std::size_t{1} << 12);
  if (prior.contains("independent")) {
    std::vector<double> marginal(s.uncertain.size(), 0.0);
    for (auto it = prior["independent"].begin(); it != prior["independent"].end(); ++it)
      marginal[bit_ids.at(it.key())] = it.value().get<double>();
    std::size_t count = std::size_t{1} << s.uncertain.size();
    if (count > cap) throw std::invalid_argument("hypothesis space exceeds cap");
    for (std::size_t mask = 0; mask < count; ++mask) {
      double p = 1.0;
      for (std::size_t bit = 0; bit < s.uncertain.size(); ++bit)
        p *= ((mask >> bit) & 1u) ? marginal[bit] : 1.0 - marginal[bit];
      if (p > 0.0) s.hypotheses.push_back({static_cast<HypMask>(mask), p});
    }
  } else {
    for (const auto& hj : prior.at("joint")) {
      Hypothesis h;
      for (auto it = hj.at("assign").begin(); it != hj.at("assign").end(); ++it)
        if (it.value().get<bool>()) h.mask |= 1u << bit_ids.at(it.key());
      h.prior = hj.at("p").get<double>();
      s.hypotheses.push_back(h);
    }
    if (s.hypotheses.size() > cap) throw std::invalid_argument("hypothesis space exceeds cap");
  }
  double total = 0.0;
  for (const auto& h : s.hypotheses) total += h.prior;
  if (std::abs(total - 1.0) > 1e-9) throw std::invalid_argument("prior does not sum to 1");

  s.task_text = j.at("task").get<std::string>();
  s.task = parse_ltlf(s.task_text, s.ap);
  s.dfa = compile_dfa(s.task, static_cast<int>(s.ap.size()));

  s.x0 = to_vec(j.at("initial").at("x"));
  if (s.x0.size() != s.dynamics.state_dim)
    throw std::invalid_argument("initial state dimension mismatch");
  if (!s.in_bounds(s.x0)) throw std::invalid_argument("initial state out of bounds");
  if (s.in_obstacle(s.x0)) throw std::invalid_argument("initial state inside an obstacle");
  for (const auto& vid : j.at("initial").value("visited", json::array())) {
    std::string id = vid.get<std::string>();
    for (std::size_t i = 0; i < s.obs_regions.size(); ++i)
      if (s.obs_regions[i].id == id) s.m0 |= 1u << i;
  }

  std::string obstacle_prop = j.value("obstacle_prop", "obs");
  for (std::size_t i = 0; i < s.ap.size(); ++i)
    if (s.ap[i] == obstacle_prop) s.obstacle_ap = static_cast<int>(i);
  if (s.obstacle_ap >= 0) {
    std::function<bool(const LtlfFormula&)> mentions = [&](const LtlfFormula& f) {
      if (f.op == LtlfOp::Atom && f.atom_index == s.obstacle_ap) return true;
      for (const auto& c : f.children)
        if (mentions(c)) return true;
      return false;
    };
    s.obstacle_in_task = mentions(s.task);
  }

  const json prop = j.value("propagation", json::object());
  s.t_prop_max = prop.value("t_prop_max", 1.0);
  s.event_tolerance = prop.value("event_tolerance", 1e-6);
  if (prop.contains("step")) {
    s.integration_step = prop["step"].get<double>();
  } else {
    double min_width = s.t_prop_max;
    for (const auto& r : s.regions) min_width = std::min(min_width, r.geom.min_width());
    for (const auto& r : s.obs_regions) min_width = std::min(min_width, r.geom.min_width());
    for (const auto& o : s.obstacles) min_width = std::min(min_width, o.min_width());
    s.integration_step = std::min(s.t_prop_max, min_width) / 20.0;
  }
  return s;
}

Scenario load_scenario_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open scenario file " + path);
  json j;
  in >> j;
  return load_scenario(j);
}

}  // namespace sabpi
