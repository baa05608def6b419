#pragma once

#include <cmath>
#include <numbers>

#include <Eigen/Core>

namespace reachplan {

template <typename Scalar>
using Vec2 = Eigen::Matrix<Scalar, 2, 1>;

template <typename Scalar>
using JointVector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

/// One arm configuration, radians per joint.
using JointConfig = JointVector<double>;
using Point2 = Vec2<double>;

/// Wraps an angle into (-pi, pi].
template <typename Scalar>
Scalar wrap_angle(Scalar angle) {
  using std::fmod;
  const Scalar pi = std::numbers::pi_v<Scalar>;
  const Scalar two_pi = 2 * pi;
  angle = fmod(angle, two_pi);
  if (angle <= -pi) {
    angle += two_pi;
  } else if (angle > pi) {
    angle -= two_pi;
  }
  return angle;
}

/// Planar pose: position in meters, heading phi in (-pi, pi].
template <typename Scalar>
struct PlanarPose {
  Vec2<Scalar> position = Vec2<Scalar>::Zero();
  Scalar phi = Scalar(0);

  PlanarPose() = default;
  PlanarPose(Scalar x, Scalar y, Scalar heading)
      : position(x, y), phi(wrap_angle(heading)) {}
  PlanarPose(const Vec2<Scalar>& p, Scalar heading)
      : position(p), phi(wrap_angle(heading)) {}

  Scalar x() const { return position.x(); }
  Scalar y() const { return position.y(); }
};

using Pose2 = PlanarPose<double>;

/// Counter-clockwise perpendicular.
template <typename Derived>
Vec2<typename Derived::Scalar> perp(const Eigen::MatrixBase<Derived>& v) {
  return {-v.y(), v.x()};
}

inline constexpr double deg_to_rad(double deg) {
  return deg * std::numbers::pi / 180.0;
}
inline constexpr double rad_to_deg(double rad) {
  return rad * 180.0 / std::numbers::pi;
}

}  // namespace reachplan
