#include "reachplan/baselines.hpp"

#include <algorithm>
#include <chrono>
#include <stdexcept>
#include <string>

#include "reachplan/clearance.hpp"

namespace reachplan {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

PlanOutcome single_solve(const Arm& arm, const Scene& scene, const PlannerParams& params,
                         const GraspPose& grasp, const SolverOptions& options) {
  SolveQuery query;
  query.start = scene.start;
  query.goal = grasp.pose;
  query.init = linear_init(arm, scene.start, grasp.pose, params.n_0);
  query.tolerance = params.mu_max;
  query.waypoints = params.n_0;
  const auto result = solve(arm, scene, query, options);

  PlanOutcome outcome;
  outcome.success = result.success;
  outcome.trajectory = result.trajectory;
  outcome.grasp = grasp;
  outcome.cost = result.cost;
  outcome.max_violation = result.max_violation;
  outcome.stats.iterations = 1;
  outcome.stats.inner_solves = 1;
  outcome.stats.inner_successes = result.success ? 1 : 0;
  outcome.stats.inner_solve_times.push_back(result.wall_time);
  outcome.stats.inner_horizons.push_back(params.n_0);
  return outcome;
}

/// Joint-space search tree with nodes stored column-wise.
class Tree {
 public:
  Tree(Eigen::Index dof, int capacity) : nodes_(dof, capacity) {
    parents_.reserve(static_cast<std::size_t>(capacity));
  }

  int add(const JointConfig& q, int parent) {
    nodes_.col(size()) = q;
    parents_.push_back(parent);
    return size() - 1;
  }

  int size() const { return static_cast<int>(parents_.size()); }
  JointConfig node(int i) const { return nodes_.col(i); }
  int parent(int i) const { return parents_[static_cast<std::size_t>(i)]; }

  int nearest(const JointConfig& q) const {
    Eigen::Index best = 0;
    (nodes_.leftCols(size()).colwise() - q).colwise().squaredNorm().minCoeff(&best);
    return static_cast<int>(best);
  }

  /// Nodes from i back to the root.
  std::vector<JointConfig> branch(int i) const {
    std::vector<JointConfig> out;
    for (; i >= 0; i = parent(i)) out.push_back(node(i));
    return out;
  }

 private:
  Eigen::MatrixXd nodes_;
  std::vector<int> parents_;
};

enum class ExtendResult { trapped, advanced, reached };

}  // namespace

std::string_view to_string(MethodId method) {
  switch (method) {
    case MethodId::rrt_connect:
      return "rrt_connect";
    case MethodId::fixed_goal:
      return "fixed_goal";
    case MethodId::variable_single:
      return "variable_single";
    case MethodId::variable_multi:
      return "variable_multi";
    case MethodId::ours:
      return "ours";
  }
  return "ours";
}

std::string_view display_name(MethodId method) {
  switch (method) {
    case MethodId::rrt_connect:
      return "RRT-Connect";
    case MethodId::fixed_goal:
      return "Fixed Goal";
    case MethodId::variable_single:
      return "Variable Goal, Single Iteration";
    case MethodId::variable_multi:
      return "Variable Goal, Multi-Iteration";
    case MethodId::ours:
      return "Ours";
  }
  return "";
}

MethodId parse_method(std::string_view text) {
  for (const MethodId m : kAllMethods)
    if (to_string(m) == text) return m;
  throw std::invalid_argument("unknown method '" + std::string(text) + "'");
}

GraspPose fixed_grasp(const Scene& scene) {
  if (!scene.fixed_grasp) throw std::invalid_argument("scene '" + scene.name + "' declares no fixed grasp");
  return {grasp_to_pose(*scene.fixed_grasp, scene.target()), *scene.fixed_grasp,
          scene.target_id};
}

PlanOutcome fixed_goal_plan(const Arm& arm, const Scene& scene, const PlannerParams& params,
                            const SolverOptions& options) {
  const auto t0 = Clock::now();
  auto outcome = single_solve(arm, scene, params, fixed_grasp(scene), options);
  outcome.stats.wall_time = seconds_since(t0);
  return outcome;
}

PlanOutcome variable_single_plan(const Arm& arm, const Scene& scene,
                                 const PlannerParams& params, Rng& rng,
                                 const SolverOptions& options) {
  return variable_multi_plan(arm, scene, params, rng, 1, options);
}

PlanOutcome variable_multi_plan(const Arm& arm, const Scene& scene,
                                const PlannerParams& params, Rng& rng, int attempts,
                                const SolverOptions& options) {
  if (attempts < 1) throw std::invalid_argument("need at least one attempt");
  const auto t0 = Clock::now();
  PlanOutcome best;
  PlanStats stats;
  for (int i = 0; i < attempts; ++i) {
    const GraspPose grasp = sample_grasp(scene.target(), scene.target_id, rng, scene.grasp);
    auto attempt = single_solve(arm, scene, params, grasp, options);
    stats.iterations += 1;
    stats.inner_solves += 1;
    stats.inner_successes += attempt.stats.inner_successes;
    stats.inner_solve_times.push_back(attempt.stats.inner_solve_times.front());
    stats.inner_horizons.push_back(params.n_0);
    if (i == 0 || (attempt.success && (!best.success || attempt.cost < best.cost)))
      best = std::move(attempt);
  }
  best.stats = std::move(stats);
  best.stats.wall_time = seconds_since(t0);
  return best;
}

PlanOutcome rrt_connect_plan(const Arm& arm, const Scene& scene, const PlannerParams& params,
                             Rng& rng, const RrtOptions& rrt, const SolverOptions& options) {
  if (!(rrt.step > 0.0)) throw std::invalid_argument("rrt step must be positive");
  const auto t0 = Clock::now();
  PlanOutcome outcome;
  outcome.stats.iterations = 1;
  const GraspPose grasp = sample_grasp(scene.target(), scene.target_id, rng, scene.grasp);
  outcome.grasp = grasp;
  const auto finish = [&]() {
    outcome.stats.wall_time = seconds_since(t0);
    return outcome;
  };

  const auto free_config = [&](const JointConfig& q) {
    return config_clearance(arm, q, scene, false).min_distance > 0.0;
  };
  const double edge_resolution = rrt.step / 5.0;
  const auto free_edge = [&](const JointConfig& from, const JointConfig& to) {
    Eigen::MatrixXd rows(2, from.size());
    rows.row(0) = from.transpose();
    rows.row(1) = to.transpose();
    return trajectory_clearance(arm, Trajectory(std::move(rows)), scene, edge_resolution)
               .min_distance > 0.0;
  };

  // Goal configuration.
  std::optional<JointConfig> goal;
  const auto ee = forward_kinematics(arm, scene.start).ee;
  if ((ee.position - grasp.pose.position).norm() <= rrt.ik.tolerance &&
      std::abs(wrap_angle(ee.phi - grasp.pose.phi)) <= rrt.ik.tolerance) {
    goal = scene.start;
  }
  for (int i = 0; !goal && i < rrt.ik_seeds; ++i) {
    JointConfig seed(arm.dof());
    for (Eigen::Index j = 0; j < arm.dof(); ++j) {
      std::uniform_real_distribution<double> u(arm.joint_lower[j], arm.joint_upper[j]);
      seed[j] = u(rng);
    }
    if (auto q = ik_solve(arm, grasp.pose, seed, rrt.ik); q && free_config(*q)) goal = q;
  }
  if (!goal) return finish();

  std::vector<JointConfig> path;
  if (*goal == scene.start) {
    path = {scene.start, scene.start};
  } else {
    Tree from_start(arm.dof(), rrt.max_nodes);
    Tree from_goal(arm.dof(), rrt.max_nodes);
    from_start.add(scene.start, -1);
    from_goal.add(*goal, -1);
    Tree* a = &from_start;
    Tree* b = &from_goal;

    const auto extend = [&](Tree& tree, const JointConfig& target, int& added) {
      const int near = tree.nearest(target);
      const JointConfig q_near = tree.node(near);
      const JointConfig dir = target - q_near;
      const double dist = dir.norm();
      const bool reaches = dist <= rrt.step;
      const JointConfig q_new = reaches ? target : JointConfig(q_near + dir * (rrt.step / dist));
      if (!free_edge(q_near, q_new)) return ExtendResult::trapped;
      added = tree.add(q_new, near);
      return reaches ? ExtendResult::reached : ExtendResult::advanced;
    };

    bool connected = false;
    int a_node = -1;
    int b_node = -1;
    while (from_start.size() + from_goal.size() < rrt.max_nodes) {
      JointConfig sample(arm.dof());
      for (Eigen::Index j = 0; j < arm.dof(); ++j) {
        std::uniform_real_distribution<double> u(arm.joint_lower[j], arm.joint_upper[j]);
        sample[j] = u(rng);
      }
      if (extend(*a, sample, a_node) != ExtendResult::trapped) {
        const JointConfig q_new = a->node(a_node);
        ExtendResult r = ExtendResult::advanced;
        while (r == ExtendResult::advanced &&
               from_start.size() + from_goal.size() < rrt.max_nodes) {
          r = extend(*b, q_new, b_node);
        }
        if (r == ExtendResult::reached) {
          connected = true;
          break;
        }
      }
      std::swap(a, b);
    }
    if (!connected) return finish();

    auto start_branch = (a == &from_start ? a : b)->branch(a == &from_start ? a_node : b_node);
    auto goal_branch = (a == &from_start ? b : a)->branch(a == &from_start ? b_node : a_node);
    path.assign(start_branch.rbegin(), start_branch.rend());
    // The connecting node appears in both branches.
    path.insert(path.end(), goal_branch.begin() + 1, goal_branch.end());
  }

  Eigen::MatrixXd rows(static_cast<Eigen::Index>(path.size()), arm.dof());
  for (std::size_t i = 0; i < path.size(); ++i)
    rows.row(static_cast<Eigen::Index>(i)) = path[i].transpose();
  outcome.trajectory = resample_by_arc_length(Trajectory(std::move(rows)), params.n_0);
  outcome.cost = trajectory_cost(outcome.trajectory, {}, options.weights);
  const auto violation = measure_violation(arm, scene, grasp.pose, outcome.trajectory,
                                           options.feasibility_resolution,
                                           options.collision_margin);
  outcome.max_violation = violation.max();
  // Resampling can cut corners of the raw path; the returned path must hold.
  outcome.success = violation.collision <= params.mu_max && violation.joint_limits <= 0.0;
  return finish();
}

PlanOutcome run_method(MethodId method, const Scene& scene, std::uint64_t seed,
                       const MethodSettings& settings) {
  Rng rng(seed);
  switch (method) {
    case MethodId::rrt_connect:
      return rrt_connect_plan(scene.arm, scene, settings.planner, rng, settings.rrt,
                              settings.solver);
    case MethodId::fixed_goal:
      return fixed_goal_plan(scene.arm, scene, settings.planner, settings.solver);
    case MethodId::variable_single:
      return variable_single_plan(scene.arm, scene, settings.planner, rng, settings.solver);
    case MethodId::variable_multi:
      return variable_multi_plan(scene.arm, scene, settings.planner, rng,
                                 settings.multi_attempts, settings.solver);
    case MethodId::ours:
      return plan(scene.arm, scene, settings.planner, rng, settings.solver);
  }
  throw std::invalid_argument("unknown method");
}

}  // namespace reachplan
