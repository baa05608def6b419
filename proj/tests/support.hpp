#pragma once

#include <cmath>
#include <random>

#include "reachplan/planner.hpp"
#include "reachplan/scene.hpp"

namespace support {

using namespace reachplan;

inline Arm unit_arm(int links = 2) {
  Arm arm;
  arm.link_lengths = Eigen::VectorXd::Ones(links);
  arm.joint_lower = Eigen::VectorXd::Constant(links, -std::numbers::pi);
  arm.joint_upper = Eigen::VectorXd::Constant(links, std::numbers::pi);
  arm.base = Pose2(Point2::Zero(), 0.0);
  return arm;
}

inline JointConfig random_config(const Arm& arm, std::mt19937_64& rng) {
  JointConfig q(arm.dof());
  for (Eigen::Index j = 0; j < arm.dof(); ++j)
    q[j] = std::uniform_real_distribution<double>(arm.joint_lower[j], arm.joint_upper[j])(rng);
  return q;
}

/// Default arm and a lone target box; the target is excluded from planning
/// collisions, so the workspace is effectively empty.
inline Scene open_scene(const Point2& target_center = Point2(0.8, 0.3)) {
  Scene s;
  s.name = "open";
  s.obstacles = {Obstacle<double>::rect(target_center, Point2(0.05, 0.05), true)};
  s.target_id = 0;
  s.start = JointConfig::Zero(s.arm.dof());
  s.start << 1.2, -0.6, -0.4, -0.3, 0.0;
  s.fixed_grasp = GraspParams{GraspSide::top, std::numbers::pi / 2, 0.0, 0.0, 0.04};
  return s;
}

/// Numerically exact minimum of a convex function on [lo, hi].
template <typename F>
double ternary_min(F&& f, double lo, double hi, int iterations = 200) {
  for (int i = 0; i < iterations; ++i) {
    const double m1 = lo + (hi - lo) / 3;
    const double m2 = hi - (hi - lo) / 3;
    if (f(m1) < f(m2))
      hi = m2;
    else
      lo = m1;
  }
  return f(0.5 * (lo + hi));
}

}  // namespace support
