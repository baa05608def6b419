#include "reachplan/grasp.hpp"

#include <algorithm>
#include <cmath>

namespace reachplan {

std::string_view to_string(GraspSide side) {
  switch (side) {
    case GraspSide::left:
      return "left";
    case GraspSide::right:
      return "right";
    case GraspSide::top:
      return "top";
  }
  return "top";
}

GraspSide parse_grasp_side(std::string_view text) {
  if (text == "left") return GraspSide::left;
  if (text == "right") return GraspSide::right;
  if (text == "top") return GraspSide::top;
  throw std::invalid_argument("unknown grasp side '" + std::string(text) + "'");
}

GraspPose sample_grasp(const Obstacle<double>& target, int target_id, Rng& rng,
                       const GraspConfig& config) {
  constexpr double pi = std::numbers::pi;
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  GraspParams params;
  params.standoff = config.standoff;
  if (target.kind == ObstacleKind::disc) {
    params.alpha = 2.0 * pi * unit(rng);
    if (params.alpha >= 2.0 * pi) params.alpha = 0.0;
  } else {
    std::uniform_int_distribution<int> side(0, 2);
    params.side = static_cast<GraspSide>(side(rng));
    params.theta = params.side == GraspSide::top ? pi / 2 : 0.5 * pi * unit(rng);
    const auto [s_min, s_max] = s_bounds(params.theta, target, config.overlap_ratio);
    params.s = s_min + (s_max - s_min) * unit(rng);
  }
  return {grasp_to_pose(params, target), params, target_id};
}

double grasp_silhouette(const GraspParams& params, const Obstacle<double>& target) {
  if (target.kind == ObstacleKind::disc) return 2.0 * target.radius;
  const double theta = params.side == GraspSide::top ? std::numbers::pi / 2 : params.theta;
  return silhouette_extent(theta, target);
}

double grasp_overlap(const GraspPose& grasp, const Obstacle<double>& target,
                     double finger_width) {
  const Point2 approach(std::cos(grasp.pose.phi), std::sin(grasp.pose.phi));
  const Point2 t = perp(approach);
  const double extent = target.kind == ObstacleKind::disc
                            ? 2.0 * target.radius
                            : 2.0 * (target.half_extents.x() * std::abs(t.x()) +
                                     target.half_extents.y() * std::abs(t.y()));
  const double object_mid = target.center.dot(t);
  const double finger_mid = grasp.pose.position.dot(t);
  const double lo = std::max(object_mid - extent / 2, finger_mid - finger_width / 2);
  const double hi = std::min(object_mid + extent / 2, finger_mid + finger_width / 2);
  return std::max(0.0, hi - lo);
}

bool grasp_within_bounds(const GraspParams& params, const Obstacle<double>& target,
                         double overlap_ratio) {
  constexpr double pi = std::numbers::pi;
  if (target.kind == ObstacleKind::disc) return params.alpha >= 0.0 && params.alpha < 2.0 * pi;
  if (params.side == GraspSide::top && params.theta != pi / 2) return false;
  if (params.theta < 0.0 || params.theta > pi / 2) return false;
  const auto [s_min, s_max] = s_bounds(params.theta, target, overlap_ratio);
  return params.s >= s_min && params.s <= s_max;
}

}  // namespace reachplan
