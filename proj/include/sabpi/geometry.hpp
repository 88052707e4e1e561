#pragma once

#include <Eigen/Core>
#include <variant>

namespace sabpi {

/// Axis-aligned box. Containment tests compare the first dim() components of
/// the query point, so lower-dimensional geometry works against full states.
struct Box {
  Eigen::VectorXd low;
  Eigen::VectorXd high;

  int dim() const { return static_cast<int>(low.size()); }

  bool contains(const Eigen::VectorXd& p) const {
    for (int i = 0; i < dim(); ++i)
      if (p[i] < low[i] || p[i] > high[i]) return false;
    return true;
  }

  double min_width() const { return (high - low).minCoeff(); }
};

struct Ball {
  Eigen::VectorXd center;
  double radius = 0.0;

  int dim() const { return static_cast<int>(center.size()); }

  bool contains(const Eigen::VectorXd& p) const {
    return (p.head(dim()) - center).squaredNorm() <= radius * radius;
  }

  double min_width() const { return radius; }
};

struct Geom {
  std::variant<Box, Ball> shape;

  bool contains(const Eigen::VectorXd& p) const {
    return std::visit([&](const auto& g) { return g.contains(p); }, shape);
  }
  int dim() const {
    return std::visit([](const auto& g) { return g.dim(); }, shape);
  }
  double min_width() const {
    return std::visit([](const auto& g) { return g.min_width(); }, shape);
  }
};

}  // namespace sabpi
