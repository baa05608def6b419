#include "reachplan/clearance.hpp"

#include <cmath>
#include <stdexcept>

namespace reachplan {

ClearanceReport config_clearance(const Arm& arm, const JointConfig& q, const Scene& scene,
                                 bool include_target) {
  const auto frames = forward_kinematics(arm, q);
  ClearanceReport report;
  for (std::size_t o = 0; o < scene.obstacles.size(); ++o) {
    const auto& obstacle = scene.obstacles[o];
    if (obstacle.is_target && !include_target) continue;
    for (std::size_t l = 0; l + 1 < frames.points.size(); ++l) {
      const Point2& a = frames.points[l];
      const Point2& b = frames.points[l + 1];
      if (segment_distance_lower_bound(a, b, obstacle) - arm.link_radius >= report.min_distance)
        continue;
      const double d = segment_distance(a, b, obstacle).distance - arm.link_radius;
      if (d < report.min_distance) {
        report.min_distance = d;
        report.link = static_cast<int>(l);
        report.obstacle = static_cast<int>(o);
      }
    }
  }
  return report;
}

ClearanceReport trajectory_clearance(const Arm& arm, const Trajectory& traj, const Scene& scene,
                                     double resolution, bool include_target) {
  if (!(resolution > 0)) throw std::invalid_argument("resolution must be positive");
  if (traj.size() < 1) throw std::invalid_argument("empty trajectory");
  const auto consider = [&](const JointConfig& q, int waypoint, ClearanceReport& best) {
    const auto report = config_clearance(arm, q, scene, include_target);
    if (report.min_distance < best.min_distance) {
      best = report;
      best.waypoint = waypoint;
    }
  };
  ClearanceReport best;
  consider(traj.front(), 0, best);
  for (Eigen::Index i = 0; i + 1 < traj.size(); ++i) {
    const JointConfig from = traj.waypoint(i);
    const JointConfig to = traj.waypoint(i + 1);
    const double span = (to - from).cwiseAbs().maxCoeff();
    long steps = 1;
    while (span / static_cast<double>(steps) > resolution) steps *= 2;
    for (long k = 1; k <= steps; ++k) {
      const double u = static_cast<double>(k) / static_cast<double>(steps);
      const JointConfig q = k == steps ? to : JointConfig((1.0 - u) * from + u * to);
      consider(q, static_cast<int>(k == steps ? i + 1 : i), best);
    }
  }
  return best;
}

}  // namespace reachplan
