#pragma once

#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>

#include "reachplan/collision.hpp"
#include "reachplan/types.hpp"

namespace reachplan {

using Rng = std::mt19937_64;

enum class GraspSide { left, right, top };

std::string_view to_string(GraspSide side);
GraspSide parse_grasp_side(std::string_view text);

/// Generating parameters of a grasp. Rectangles use (side, theta, s); discs
/// use alpha. Angles in radians, lengths in meters.
struct GraspParams {
  GraspSide side = GraspSide::top;
  double theta = std::numbers::pi / 2;
  double s = 0.0;
  double alpha = 0.0;
  double standoff = 0.04;

  bool operator==(const GraspParams&) const = default;
};

struct GraspPose {
  Pose2 pose;
  GraspParams params;
  int target_id = -1;
};

/// Sampling configuration of a scene's target.
struct GraspConfig {
  double standoff = 0.04;
  double overlap_ratio = 0.5;
  /// Length of the finger pad line used by the overlap check.
  double finger_width = 0.20;

  bool operator==(const GraspConfig&) const = default;
};

/// Width of the rectangle's silhouette seen along an approach at angle theta
/// from horizontal.
template <typename Scalar>
Scalar silhouette_extent(Scalar theta, const Obstacle<Scalar>& rect) {
  using std::cos;
  using std::sin;
  const Scalar w = 2 * rect.half_extents.x();
  const Scalar h = 2 * rect.half_extents.y();
  return w * sin(theta) + h * cos(theta);
}

/// Symmetric slide bounds that keep a fraction `overlap_ratio` of the
/// silhouette under the gripper.
template <typename Scalar>
std::pair<Scalar, Scalar> s_bounds(Scalar theta, const Obstacle<Scalar>& rect,
                                   Scalar overlap_ratio) {
  if (rect.kind != ObstacleKind::rect) throw std::invalid_argument("s_bounds needs a rect");
  if (!(overlap_ratio > 0) || overlap_ratio > 1)
    throw std::invalid_argument("overlap ratio must lie in (0, 1]");
  const Scalar s_max = (1 - overlap_ratio) * silhouette_extent(theta, rect) / 2;
  return {-s_max, s_max};
}

/// Flange pose realizing `params` on `target`.
///
/// Rectangle, right side: the anchor slides linearly from the right face
/// midpoint (theta = 0) to the top face midpoint (theta = pi/2) while the
/// outward normal n = (cos theta, sin theta) rotates with it. The flange sits
/// at anchor + standoff n + s t with t the normal's left perpendicular and
/// faces along -n. The left side mirrors this in x; the top side fixes
/// theta = pi/2 and slides along +x. Discs: the flange sits at distance
/// radius + standoff along (cos alpha, sin alpha) and faces the center.
template <typename Scalar>
PlanarPose<Scalar> grasp_to_pose(const GraspParams& params, const Obstacle<Scalar>& target) {
  using std::cos;
  using std::sin;
  const Scalar pi = std::numbers::pi_v<Scalar>;
  if (!(params.standoff >= 0)) throw std::invalid_argument("grasp standoff is negative");
  if (target.kind == ObstacleKind::disc) {
    const Vec2<Scalar> dir(cos(Scalar(params.alpha)), sin(Scalar(params.alpha)));
    return PlanarPose<Scalar>(target.center + (target.radius + Scalar(params.standoff)) * dir,
                              Scalar(params.alpha) + pi);
  }
  const Scalar theta = params.side == GraspSide::top ? pi / 2 : Scalar(params.theta);
  if (theta < 0 || theta > pi / 2)
    throw std::invalid_argument("grasp angle outside [0, pi/2]");
  if (std::abs(Scalar(params.s)) > silhouette_extent(theta, target) / 2)
    throw std::invalid_argument("grasp slide exceeds the silhouette");

  const Vec2<Scalar>& h = target.half_extents;
  const Scalar d = Scalar(params.standoff);
  if (params.side == GraspSide::top) {
    const Vec2<Scalar> local(Scalar(params.s), h.y() + d);
    return PlanarPose<Scalar>(target.center + local, -pi / 2);
  }
  const Scalar u = 2 * theta / pi;
  const Vec2<Scalar> anchor = (1 - u) * Vec2<Scalar>(h.x(), 0) + u * Vec2<Scalar>(0, h.y());
  const Vec2<Scalar> n(cos(theta), sin(theta));
  const Vec2<Scalar> t = perp(n);
  Vec2<Scalar> local = anchor + d * n + Scalar(params.s) * t;
  Scalar heading = theta - pi;
  if (params.side == GraspSide::left) {
    local.x() = -local.x();
    heading = -theta;
  }
  return PlanarPose<Scalar>(target.center + local, heading);
}

/// Uniform sample over the target's grasp family.
GraspPose sample_grasp(const Obstacle<double>& target, int target_id, Rng& rng,
                       const GraspConfig& config);

/// Length of the overlap between the finger pad line (centered at the grasp
/// center, perpendicular to the approach) and the target silhouette.
double grasp_overlap(const GraspPose& grasp, const Obstacle<double>& target,
                     double finger_width);

/// Silhouette extent perpendicular to the approach of `params`.
double grasp_silhouette(const GraspParams& params, const Obstacle<double>& target);

/// True when |s| respects s_bounds (rect) and angles lie in range.
bool grasp_within_bounds(const GraspParams& params, const Obstacle<double>& target,
                         double overlap_ratio);

}  // namespace reachplan
