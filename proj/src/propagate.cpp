#include "sabpi/propagate.hpp"

#include <cmath>

namespace sabpi {

Eigen::VectorXd rk4_step(const DynamicsModel& m, const Eigen::VectorXd& x,
                         const Eigen::VectorXd& u, double h) {
  Eigen::VectorXd k1, k2, k3, k4;
  m.derivative(x, u, k1);
  m.derivative(x + 0.5 * h * k1, u, k2);
  m.derivative(x + 0.5 * h * k2, u, k3);
  m.derivative(x + h * k3, u, k4);
  return x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

namespace {

// Bisects tau in (0, h] on `inside(rk4(x, u, tau))`, with inside false at
// tau = 0 and true at tau = h. Returns the first inside time and state.
template <typename Pred>
std::pair<double, Eigen::VectorXd> bisect_crossing(const Scenario& s, const Eigen::VectorXd& x,
                                                   const Eigen::VectorXd& u, double h,
                                                   Pred inside) {
  double lo = 0.0, hi = h;
  while (hi - lo > s.event_tolerance) {
    double mid = 0.5 * (lo + hi);
    if (inside(rk4_step(s.dynamics, x, u, mid)))
      hi = mid;
    else
      lo = mid;
  }
  return {hi, rk4_step(s.dynamics, x, u, hi)};
}

}  // namespace

PropagationResult propagate(const Scenario& s, const Eigen::VectorXd& x0, MemoryVector memory,
                            const Eigen::VectorXd& u, double t_req) {
  // Arm flags: a guard fires only after the trajectory has been outside it.
  std::vector<bool> in_region(s.regions.size());
  for (std::size_t i = 0; i < s.regions.size(); ++i) in_region[i] = s.regions[i].geom.contains(x0);
  std::vector<bool> in_obs(s.obs_regions.size());
  for (std::size_t i = 0; i < s.obs_regions.size(); ++i)
    in_obs[i] = s.obs_regions[i].geom.contains(x0);

  const double h = s.integration_step;
  Eigen::VectorXd x = x0;
  double t = 0.0;
  while (t < t_req) {
    double step = std::min(h, t_req - t);
    Eigen::VectorXd xn = rk4_step(s.dynamics, x, u, step);
    if (!xn.allFinite()) return {PropOutcome::LeftBounds, -1, x, t};

    if (!s.in_bounds(xn) || s.in_obstacle(xn)) {
      auto [tau, xe] = bisect_crossing(
          s, x, u, step,
          [&](const Eigen::VectorXd& p) { return !s.in_bounds(p) || s.in_obstacle(p); });
      PropOutcome oc = s.in_obstacle(xe) ? PropOutcome::Collided : PropOutcome::LeftBounds;
      return {oc, -1, xe, t + tau};
    }

    for (std::size_t i = 0; i < s.regions.size(); ++i) {
      if (in_region[i]) continue;
      if (!s.regions[i].geom.contains(xn)) continue;
      auto [tau, xe] = bisect_crossing(
          s, x, u, step, [&](const Eigen::VectorXd& p) { return s.regions[i].geom.contains(p); });
      return {PropOutcome::HitRegion, static_cast<int>(i), xe, t + tau};
    }

    for (std::size_t i = 0; i < s.obs_regions.size(); ++i) {
      if (in_obs[i] || ((memory >> i) & 1u)) continue;  // persistence: visited is transparent
      if (!s.obs_regions[i].geom.contains(xn)) continue;
      auto [tau, xe] = bisect_crossing(s, x, u, step, [&](const Eigen::VectorXd& p) {
        return s.obs_regions[i].geom.contains(p);
      });
      return {PropOutcome::HitObservation, static_cast<int>(i), xe, t + tau};
    }

    for (std::size_t i = 0; i < s.regions.size(); ++i)
      if (in_region[i] && !s.regions[i].geom.contains(xn)) in_region[i] = false;
    for (std::size_t i = 0; i < s.obs_regions.size(); ++i)
      if (in_obs[i] && !s.obs_regions[i].geom.contains(xn)) in_obs[i] = false;

    x = std::move(xn);
    t += step;
  }
  return {PropOutcome::FullDuration, -1, x, t_req};
}

std::optional<Eigen::VectorXd> exit_current_region(const Scenario& s, const Eigen::VectorXd& x0,
                                                   const Eigen::VectorXd& u, int max_steps) {
  auto inside_any = [&](const Eigen::VectorXd& p) {
    for (const auto& r : s.regions)
      if (r.geom.contains(x0) && r.geom.contains(p)) return true;
    for (const auto& r : s.obs_regions)
      if (r.geom.contains(x0) && r.geom.contains(p)) return true;
    return false;
  };
  Eigen::VectorXd x = x0;
  for (int i = 0; i < max_steps; ++i) {
    if (!inside_any(x)) return x;
    x = rk4_step(s.dynamics, x, u, s.integration_step);
    if (!x.allFinite()) return std::nullopt;
  }
  return std::nullopt;
}

}  // namespace sabpi
