#pragma once

#include <vector>

#include <Eigen/Core>

#include "reachplan/kinematics.hpp"
#include "reachplan/scene.hpp"
#include "reachplan/trajectory.hpp"

namespace reachplan {

struct CostWeights {
  double acceleration = 1.0;
  double jerk = 1.0;
};

/// Sum of squared first, second and third finite differences over
/// prefix + waypoints, with the second and third weighted.
double trajectory_cost(const Trajectory& traj, const Eigen::MatrixXd& fixed_prefix = {},
                       const CostWeights& weights = {});

/// Straight joint-space path to `goal_config`.
Trajectory linear_init(const JointConfig& start, const JointConfig& goal_config,
                       Eigen::Index n);

/// Straight joint-space path to an IK solution of `goal` seeded at `start`;
/// n copies of `start` when IK fails.
Trajectory linear_init(const Arm& arm, const JointConfig& start, const Pose2& goal,
                       Eigen::Index n);

/// One planning query for the inner optimizer.
struct SolveQuery {
  JointConfig start;
  Pose2 goal;
  Trajectory init;
  /// Largest constraint violation a successful solution may keep.
  double tolerance = 0.01;
  Eigen::Index waypoints = 30;
  /// Immutable waypoints preceding `start`; only enter the smoothness cost.
  Eigen::MatrixXd fixed_prefix;
};

struct SolverOptions {
  CostWeights weights;
  double initial_penalty = 10.0;
  double penalty_scale = 10.0;
  int max_penalty_phases = 5;
  int max_sqp_iterations = 60;
  double trust_initial = 0.1;
  double trust_max = 0.5;
  double trust_min = 1e-4;
  double trust_expand = 1.5;
  double trust_shrink = 0.5;
  double improve_ratio = 0.1;
  double min_model_improve = 1e-6;
  int irls_iterations = 5;
  /// Required clearance beyond the link radius.
  double collision_margin = 0.0;
  /// Pairs closer than margin + this distance enter the convex model.
  double active_distance = 0.08;
  /// Largest joint change between collision samples inside the optimizer.
  double interp_resolution = 0.05;
  /// Sampling used to certify a solution between waypoints.
  double feasibility_resolution = 0.005;
  bool record_trace = false;
};

/// Largest violation of each constraint family.
struct ViolationReport {
  /// max(position error in m, |heading error| in rad) at the last waypoint.
  double goal = 0.0;
  double collision = 0.0;
  double joint_limits = 0.0;

  double max() const { return std::max(goal, std::max(collision, joint_limits)); }
};

struct TraceEntry {
  int phase;
  double penalty;
  double merit;
};

struct SolveResult {
  bool success = false;
  Trajectory trajectory;
  double cost = 0.0;
  double max_violation = 0.0;
  int sqp_iterations = 0;
  int penalty_phases = 0;
  double wall_time = 0.0;
  /// Merit after every accepted step, when options.record_trace is set.
  std::vector<TraceEntry> trace;
};

/// Violations of `traj` against the goal, the scene and the joint limits.
/// Collisions are checked densely between waypoints at `resolution`. The
/// first waypoint is fixed and never counted; when it is itself in
/// collision, the interior of the first segment is exempt as well.
ViolationReport measure_violation(const Arm& arm, const Scene& scene, const Pose2& goal,
                                  const Trajectory& traj, double resolution,
                                  double collision_margin = 0.0);

/// Exact-penalty merit of a query over the free waypoints 1..N-1, flattened
/// waypoint-major. Collisions are sampled at waypoints and interpolated
/// configurations between them.
class PenalizedObjective {
 public:
  PenalizedObjective(const Arm& arm, const Scene& scene, const SolveQuery& query,
                     const SolverOptions& options);

  Eigen::Index num_variables() const { return (n_ - 1) * dof_; }
  Eigen::VectorXd pack(const Trajectory& traj) const;
  Trajectory unpack(const Eigen::VectorXd& x) const;

  double cost(const Eigen::VectorXd& x) const;
  Eigen::VectorXd cost_gradient(const Eigen::VectorXd& x) const;
  /// Sum of l1 goal residuals, collision hinges and joint-limit hinges.
  double penalty_sum(const Eigen::VectorXd& x) const;
  double value(const Eigen::VectorXd& x, double penalty) const;
  Eigen::VectorXd gradient(const Eigen::VectorXd& x, double penalty) const;

  /// Largest discrete violation (collision at the optimizer's samples only).
  double sampled_violation(const Eigen::VectorXd& x) const;

  void set_interp_resolution(double r) { interp_resolution_ = r; }

  struct Term {
    // Term value is `value + grad . (w0 dq[k0] + w1 dq[k1])` to first order;
    // k < 0 marks a fixed waypoint.
    int k0 = -1;
    int k1 = -1;
    double w0 = 0.0;
    double w1 = 0.0;
    JointConfig grad;
    double value = 0.0;
    bool hinge = true;
  };

  /// Linearizes goal and active collision terms at x.
  std::vector<Term> linearize(const Eigen::VectorXd& x) const;

  const Eigen::MatrixXd& smoothness_matrix() const { return K_; }
  Eigen::Index dof() const { return dof_; }
  Eigen::Index waypoints() const { return n_; }
  Eigen::Index prefix_rows() const { return p_; }

 private:
  struct Sample {
    int k0;
    int k1;
    double w0;
    double w1;
  };

  Eigen::MatrixXd full_rows(const Eigen::VectorXd& x) const;
  std::vector<Sample> collision_samples(const Eigen::MatrixXd& rows) const;
  template <typename Visitor>
  void visit_collisions(const Eigen::MatrixXd& rows, Visitor&& visit) const;

  const Arm& arm_;
  const Scene& scene_;
  const SolveQuery& query_;
  const SolverOptions& options_;
  Eigen::Index dof_;
  Eigen::Index n_;
  Eigen::Index p_;
  double interp_resolution_;
  bool start_in_collision_ = false;
  // Smoothness quadratic form over prefix + waypoints.
  Eigen::MatrixXd K_;
};

/// Penalty SQP on the smoothness cost subject to goal, collision and joint
/// limit constraints. Never throws for well-formed queries.
SolveResult solve(const Arm& arm, const Scene& scene, const SolveQuery& query,
                  const SolverOptions& options = {});

}  // namespace reachplan
