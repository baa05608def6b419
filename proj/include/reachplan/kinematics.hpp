#pragma once

#include <algorithm>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "reachplan/types.hpp"

namespace reachplan {

/// Planar serial arm with revolute joints. Joint i sits at the end of link
/// i-1 (joint 0 at the base) and every angle is relative to the previous link.
template <typename Scalar>
struct ArmModel {
  JointVector<Scalar> link_lengths;
  JointVector<Scalar> joint_lower;
  JointVector<Scalar> joint_upper;
  PlanarPose<Scalar> base;
  /// Flange-to-grasp-center distance of the gripper.
  Scalar gripper_standoff = Scalar(0.04);
  /// Link thickness, subtracted from every signed distance.
  Scalar link_radius = Scalar(0.02);

  Eigen::Index dof() const { return link_lengths.size(); }
  Scalar reach() const { return link_lengths.sum(); }

  void validate() const {
    if (dof() < 2) throw std::invalid_argument("arm needs at least 2 links");
    if (joint_lower.size() != dof() || joint_upper.size() != dof())
      throw std::invalid_argument("joint limit count does not match link count");
    for (Eigen::Index i = 0; i < dof(); ++i) {
      if (!(link_lengths[i] > 0))
        throw std::invalid_argument("link " + std::to_string(i) + " has non-positive length");
      if (!(joint_lower[i] < joint_upper[i]))
        throw std::invalid_argument("joint " + std::to_string(i) + " has lower >= upper");
    }
    if (gripper_standoff < 0) throw std::invalid_argument("gripper standoff is negative");
    if (link_radius < 0) throw std::invalid_argument("link radius is negative");
  }

  bool within_limits(const JointVector<Scalar>& q, Scalar slack = Scalar(0)) const {
    return ((q - joint_lower).array() >= -slack).all() &&
           ((joint_upper - q).array() >= -slack).all();
  }

  JointVector<Scalar> clamp(const JointVector<Scalar>& q) const {
    return q.cwiseMax(joint_lower).cwiseMin(joint_upper);
  }
};

using Arm = ArmModel<double>;

/// Five-joint arm used by the shipped scenes.
inline Arm default_arm() {
  Arm arm;
  arm.link_lengths.resize(5);
  arm.link_lengths << 0.40, 0.35, 0.30, 0.25, 0.15;
  arm.joint_lower = JointConfig::Constant(5, -2.6);
  arm.joint_upper = JointConfig::Constant(5, 2.6);
  arm.joint_lower[0] = -std::numbers::pi;
  arm.joint_upper[0] = std::numbers::pi;
  return arm;
}

template <typename Scalar>
struct ArmFrames {
  /// Joint positions followed by the flange: dof + 1 points.
  std::vector<Vec2<Scalar>> points;
  /// Absolute heading of each link.
  std::vector<Scalar> headings;
  PlanarPose<Scalar> ee;
};

template <typename Scalar>
void check_dimension(const ArmModel<Scalar>& arm, const JointVector<Scalar>& q) {
  if (q.size() != arm.dof())
    throw std::invalid_argument("configuration has " + std::to_string(q.size()) +
                                " joints, arm has " + std::to_string(arm.dof()));
}

template <typename Scalar>
ArmFrames<Scalar> forward_kinematics(const ArmModel<Scalar>& arm, const JointVector<Scalar>& q) {
  using std::cos;
  using std::sin;
  check_dimension(arm, q);
  ArmFrames<Scalar> out;
  const auto n = arm.dof();
  out.points.reserve(static_cast<std::size_t>(n + 1));
  out.headings.reserve(static_cast<std::size_t>(n));
  Vec2<Scalar> p = arm.base.position;
  Scalar heading = arm.base.phi;
  out.points.push_back(p);
  for (Eigen::Index i = 0; i < n; ++i) {
    heading += q[i];
    p += arm.link_lengths[i] * Vec2<Scalar>(cos(heading), sin(heading));
    out.points.push_back(p);
    out.headings.push_back(heading);
  }
  out.ee = PlanarPose<Scalar>(p, heading);
  return out;
}

/// 3 x dof Jacobian of (x, y, phi) of the flange.
template <typename Scalar>
Eigen::Matrix<Scalar, 3, Eigen::Dynamic> jacobian(const ArmModel<Scalar>& arm,
                                                 const JointVector<Scalar>& q) {
  const auto frames = forward_kinematics(arm, q);
  const auto n = arm.dof();
  Eigen::Matrix<Scalar, 3, Eigen::Dynamic> J(3, n);
  const Vec2<Scalar>& tip = frames.points.back();
  for (Eigen::Index j = 0; j < n; ++j) {
    J.template block<2, 1>(0, j) = perp(tip - frames.points[static_cast<std::size_t>(j)]);
    J(2, j) = Scalar(1);
  }
  return J;
}

/// Gradient of a scalar field f(p) with respect to q, where p lies on link
/// `link` and d f / d p = `direction`. Joints beyond the link do not move p.
template <typename Scalar>
JointVector<Scalar> point_gradient(const ArmFrames<Scalar>& frames, Eigen::Index link,
                                   const Vec2<Scalar>& point, const Vec2<Scalar>& direction) {
  const auto n = static_cast<Eigen::Index>(frames.headings.size());
  JointVector<Scalar> g = JointVector<Scalar>::Zero(n);
  for (Eigen::Index j = 0; j <= link; ++j)
    g[j] = direction.dot(perp(point - frames.points[static_cast<std::size_t>(j)]));
  return g;
}

struct IkOptions {
  double tolerance = 1e-4;
  int max_iterations = 200;
  double damping = 0.05;
  double max_step = 0.3;
};

/// Damped least squares on (x, y, phi). Returns nullopt when the iteration
/// budget runs out before the pose is matched within limits.
template <typename Scalar>
std::optional<JointVector<Scalar>> ik_solve(const ArmModel<Scalar>& arm,
                                            const PlanarPose<Scalar>& target,
                                            const JointVector<Scalar>& seed,
                                            const IkOptions& options = {}) {
  check_dimension(arm, seed);
  if (!(options.tolerance > 0)) throw std::invalid_argument("ik tolerance must be positive");
  const Scalar lambda_sq = Scalar(options.damping * options.damping);
  JointVector<Scalar> q = arm.clamp(seed);
  for (int iter = 0; iter <= options.max_iterations; ++iter) {
    const auto frames = forward_kinematics(arm, q);
    Eigen::Matrix<Scalar, 3, 1> err;
    err.template head<2>() = target.position - frames.ee.position;
    err[2] = wrap_angle(target.phi - frames.ee.phi);
    if (err.template head<2>().norm() <= options.tolerance &&
        std::abs(err[2]) <= options.tolerance) {
      return q;
    }
    if (iter == options.max_iterations) break;
    const auto J = jacobian(arm, q);
    const Eigen::Matrix<Scalar, 3, 3> JJt =
        J * J.transpose() + lambda_sq * Eigen::Matrix<Scalar, 3, 3>::Identity();
    JointVector<Scalar> dq = J.transpose() * JJt.ldlt().solve(err);
    const Scalar largest = dq.cwiseAbs().maxCoeff();
    if (largest > options.max_step) dq *= Scalar(options.max_step) / largest;
    q = arm.clamp(q + dq);
  }
  return std::nullopt;
}

}  // namespace reachplan
