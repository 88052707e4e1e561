#pragma once

#include <optional>

#include <Eigen/Core>

#include "sabpi/scenario.hpp"

namespace sabpi {

enum class PropOutcome { FullDuration, HitRegion, HitObservation, Collided, LeftBounds };

struct PropagationResult {
  PropOutcome outcome = PropOutcome::FullDuration;
  int region = -1;  // semantic or observation region index for Hit* outcomes
  Eigen::VectorXd x_end;
  double t_actual = 0.0;
};

/// One classical RK4 step of length h under constant control.
Eigen::VectorXd rk4_step(const DynamicsModel& m, const Eigen::VectorXd& x,
                         const Eigen::VectorXd& u, double h);

/// Integrates the dynamics under constant control u for up to t_req seconds,
/// stopping at the first guard crossing or collision. Fixed-step RK4 at the
/// scenario's integration step; crossings are localized by bisection in time
/// to the scenario's event tolerance.
///
/// Regions containing x at the start are transparent until first exited, so a
/// node created on a guard does not immediately re-trigger it. Observation
/// regions whose memory bit is set are always transparent (persistence).
/// Guard priority within a step: collision/bounds > region > observation;
/// ties broken by lowest region index. Non-finite states report LeftBounds.
PropagationResult propagate(const Scenario& s, const Eigen::VectorXd& x0, MemoryVector memory,
                            const Eigen::VectorXd& u, double t_req);

/// Integrates until x leaves every region that currently contains it, or the
/// step budget runs out (returns nullopt: the control never exits).
std::optional<Eigen::VectorXd> exit_current_region(const Scenario& s, const Eigen::VectorXd& x0,
                                                   const Eigen::VectorXd& u, int max_steps = 4000);

}  // namespace sabpi
