#pragma once

#include <optional>
#include <string>
#include <vector>

#include "reachplan/collision.hpp"
#include "reachplan/grasp.hpp"
#include "reachplan/kinematics.hpp"

namespace reachplan {

struct Workspace {
  Point2 lower{-1.5, -1.0};
  Point2 upper{1.5, 1.5};

  bool operator==(const Workspace&) const = default;
};

/// A planning problem: arm, obstacles (one flagged as the grasp target),
/// start configuration, and grasp settings.
struct Scene {
  std::string name;
  Arm arm = default_arm();
  std::vector<Obstacle<double>> obstacles;
  int target_id = -1;
  JointConfig start;
  std::optional<GraspParams> fixed_grasp;
  Workspace bounds;
  GraspConfig grasp;

  const Obstacle<double>& target() const {
    return obstacles.at(static_cast<std::size_t>(target_id));
  }
};

}  // namespace reachplan
