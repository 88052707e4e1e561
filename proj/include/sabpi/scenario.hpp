#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <nlohmann/json_fwd.hpp>

#include "sabpi/dfa.hpp"
#include "sabpi/geometry.hpp"
#include "sabpi/ltlf.hpp"

namespace sabpi {

/// Joint environment hypothesis: one bit per uncertain (region, proposition)
/// pair, in declaration order.
using HypMask = std::uint32_t;

/// Visited-observation-region bitvector; bit k set means observation region k
/// has been visited. Monotone along any trajectory.
using MemoryVector = std::uint32_t;

struct UncertainProp {
  int region = -1;    // index into Scenario::regions
  int ap_index = -1;  // which AP the bit asserts inside the region
};

struct SemanticRegion {
  std::string id;
  Geom geom;
  ApSet certain_labels = 0;
  std::vector<int> uncertain_bits;  // indices into Scenario::uncertain
};

struct ObservationRegion {
  std::string id;
  Geom geom;
  int target_region = -1;
  std::vector<int> sensed_bits;  // uncertain bits of the target this sensor reads
  /// P(o | h): row per hypothesis restriction h (bit j = sensed_bits[j]),
  /// column per observation symbol in the same encoding. Rows sum to 1.
  std::vector<std::vector<double>> table;

  int num_obs() const { return 1 << sensed_bits.size(); }
};

/// Proposition that is true everywhere whenever any of the listed hypothesis
/// bits is set (e.g. a global "fire" flag raised by any burning site).
struct DerivedProp {
  int ap_index = -1;
  std::vector<int> bits;
};

struct FuelModel {
  int dim = -1;  // state dimension holding the remaining fuel
  double idle_rate = 0.0;
  double control_rate = 0.0;
  int ap_index = -1;  // proposition true while fuel > 0
};

enum class DynamicsKind { SingleIntegrator, SecondOrderCar, Quadcopter3D };

struct DynamicsModel {
  DynamicsKind kind = DynamicsKind::SingleIntegrator;
  int state_dim = 0;
  int control_dim = 0;
  int position_dims = 0;
  std::optional<FuelModel> fuel;

  void derivative(const Eigen::VectorXd& x, const Eigen::VectorXd& u, Eigen::VectorXd& dx) const;
};

struct Hypothesis {
  HypMask mask = 0;
  double prior = 0.0;
};

class Scenario {
 public:
  std::string name;
  std::vector<std::string> ap;
  Box state_box;
  Box control_box;
  std::vector<Geom> obstacles;
  DynamicsModel dynamics;
  std::vector<SemanticRegion> regions;
  std::vector<ObservationRegion> obs_regions;
  std::vector<UncertainProp> uncertain;
  std::vector<DerivedProp> derived;
  std::vector<Hypothesis> hypotheses;  // prior support, sums to 1
  std::string task_text;
  LtlfFormula task;
  Dfa dfa;
  Eigen::VectorXd x0;
  MemoryVector m0 = 0;
  int obstacle_ap = -1;  // AP raised inside obstacles / out of bounds, or -1
  bool obstacle_in_task = false;  // collision dooms belief mass iff the task mentions it
  double integration_step = 0.0;
  double event_tolerance = 1e-6;
  double t_prop_max = 1.0;

  /// Labels visible at x under joint hypothesis e: certain labels of
  /// containing regions, hypothesis-assigned uncertain labels, derived
  /// globals, the fuel proposition while fuel remains, and the obstacle
  /// proposition when x sits inside an obstacle.
  ApSet label_at(const Eigen::VectorXd& x, HypMask e) const;

  bool in_obstacle(const Eigen::VectorXd& x) const;
  bool in_bounds(const Eigen::VectorXd& x) const;

  /// True iff x lies inside some semantic region.
  bool guard_R(const Eigen::VectorXd& x) const;

  /// Containing observation region, lowest id on overlap; nullopt outside.
  std::optional<int> guard_T(const Eigen::VectorXd& x) const;

  /// Z(o | x, region, e, m): uniform over O once the region's memory bit is
  /// set (null observation), else the region's table row for e.
  double obs_likelihood(const Eigen::VectorXd& x, int obs_region, HypMask e, MemoryVector m,
                        int o) const;

  /// Restriction of e to the bits sensed by the given observation region.
  int hypothesis_row(int obs_region, HypMask e) const;

  ApSet obstacle_symbol() const { return obstacle_ap >= 0 ? (1u << obstacle_ap) : 0u; }
};

MemoryVector memory_update(MemoryVector m, int obs_region);

Scenario load_scenario(const nlohmann::json& j);
Scenario load_scenario_file(const std::string& path);

}  // namespace sabpi
