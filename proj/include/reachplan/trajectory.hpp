#pragma once

#include <algorithm>
#include <stdexcept>
#include <utility>

#include <Eigen/Core>

#include "reachplan/types.hpp"

namespace reachplan {

/// Ordered joint-space waypoints, one per row.
struct Trajectory {
  Eigen::MatrixXd waypoints;

  Trajectory() = default;
  explicit Trajectory(Eigen::MatrixXd rows) : waypoints(std::move(rows)) {}

  Eigen::Index size() const { return waypoints.rows(); }
  Eigen::Index dof() const { return waypoints.cols(); }
  JointConfig waypoint(Eigen::Index i) const { return waypoints.row(i).transpose(); }
  JointConfig front() const { return waypoint(0); }
  JointConfig back() const { return waypoint(size() - 1); }

  bool operator==(const Trajectory& other) const {
    return waypoints.rows() == other.waypoints.rows() &&
           waypoints.cols() == other.waypoints.cols() && waypoints == other.waypoints;
  }
};

/// `n` waypoints evenly spaced from `from` to `to`; the ends are copied exactly.
inline Trajectory linear_interpolation(const JointConfig& from, const JointConfig& to,
                                       Eigen::Index n) {
  if (n < 2) throw std::invalid_argument("interpolation needs at least 2 waypoints");
  if (from.size() != to.size()) throw std::invalid_argument("dimension mismatch");
  Eigen::MatrixXd rows(n, from.size());
  for (Eigen::Index i = 0; i < n; ++i) {
    const double u = static_cast<double>(i) / static_cast<double>(n - 1);
    rows.row(i) = ((1.0 - u) * from + u * to).transpose();
  }
  rows.row(0) = from.transpose();
  rows.row(n - 1) = to.transpose();
  return Trajectory(std::move(rows));
}

/// Resamples a polyline to `n` waypoints equally spaced in cumulative
/// joint-space arc length. Endpoints are preserved bitwise.
inline Trajectory resample_by_arc_length(const Trajectory& traj, Eigen::Index n) {
  if (n < 2) throw std::invalid_argument("resampling needs at least 2 waypoints");
  if (traj.size() < 1) throw std::invalid_argument("cannot resample an empty trajectory");
  const Eigen::Index m = traj.size();
  Eigen::VectorXd arc = Eigen::VectorXd::Zero(m);
  for (Eigen::Index i = 1; i < m; ++i)
    arc[i] = arc[i - 1] + (traj.waypoints.row(i) - traj.waypoints.row(i - 1)).norm();
  Eigen::MatrixXd rows(n, traj.dof());
  const double total = arc[m - 1];
  Eigen::Index seg = 0;
  for (Eigen::Index k = 0; k < n; ++k) {
    if (total <= 0.0 || m == 1) {
      rows.row(k) = traj.waypoints.row(k * (m - 1) / (n - 1));
      continue;
    }
    const double target = total * static_cast<double>(k) / static_cast<double>(n - 1);
    while (seg + 1 < m - 1 && arc[seg + 1] < target) ++seg;
    const double len = arc[seg + 1] - arc[seg];
    const double u = len > 0 ? std::clamp((target - arc[seg]) / len, 0.0, 1.0) : 0.0;
    rows.row(k) = (1.0 - u) * traj.waypoints.row(seg) + u * traj.waypoints.row(seg + 1);
  }
  rows.row(0) = traj.waypoints.row(0);
  rows.row(n - 1) = traj.waypoints.row(m - 1);
  return Trajectory(std::move(rows));
}

}  // namespace reachplan
