#pragma once

#include "reachplan/scene.hpp"
#include "reachplan/trajectory.hpp"

namespace reachplan {

/// Reported in place of +infinity when there is nothing to collide with.
inline constexpr double kClearanceCap = 1e6;

struct ClearanceReport {
  /// Meters; negative means penetration.
  double min_distance = kClearanceCap;
  int link = -1;
  int obstacle = -1;
  int waypoint = -1;
};

/// Minimum signed distance between the arm links (thickened by the arm's
/// link radius) and the scene obstacles.
ClearanceReport config_clearance(const Arm& arm, const JointConfig& q, const Scene& scene,
                                 bool include_target);

/// Minimum clearance along the piecewise-linear joint-space path. Each segment
/// is split into the smallest power-of-two number of equal steps whose
/// largest joint change is at most `resolution`, so halving the resolution
/// only ever adds samples.
ClearanceReport trajectory_clearance(const Arm& arm, const Trajectory& traj, const Scene& scene,
                                     double resolution, bool include_target = false);

}  // namespace reachplan
