#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "reachplan/grasp.hpp"
#include "reachplan/optimizer.hpp"
#include "reachplan/scene.hpp"

namespace reachplan {

/// Outer-loop settings.
struct PlannerParams {
  double mu_max = 0.01;
  double mu_0 = 1.0;
  int max_iters = 40;
  Eigen::Index n_0 = 30;
  /// Fraction of the current horizon committed per commitment step.
  double commit_fraction = 0.25;
  /// Largest committed list, as a fraction of n_0.
  double commit_cap = 0.5;
  /// mu shrinks by this factor per commitment step; the default reaches
  /// mu_max from 100 mu_max in five steps.
  double mu_decay = 0.39810717055349725;

  void validate() const;
};

struct TempEntry {
  Trajectory trajectory;
  GraspPose grasp;
  double cost = 0.0;
};

struct Candidate {
  Trajectory trajectory;
  double cost = 0.0;
  GraspPose grasp;
};

/// Mutable outer-loop state. The full trajectory is always
/// q_s, committed..., then the horizon solution after its first waypoint
/// (which equals q0, the last committed waypoint or q_s).
struct PlannerState {
  JointConfig q_s;
  JointConfig q0;
  double mu = 0.0;
  Eigen::Index n = 0;
  /// Committed waypoints, one per row, excluding q_s.
  Eigen::MatrixXd committed;
  int s = 0;
  int s_thres = 1;
  std::vector<TempEntry> temp;
  std::vector<Candidate> candidates;

  static PlannerState initial(const JointConfig& q_s, const PlannerParams& params);
  Eigen::Index committed_count() const { return committed.rows(); }
  /// Up to two waypoints preceding q0 on the committed path.
  Eigen::MatrixXd seam_prefix() const;
};

struct RefinementRecord {
  double init_cost = 0.0;
  double init_violation = 0.0;
  bool success = false;
  double refined_cost = 0.0;
  double refined_violation = 0.0;
};

struct PlanStats {
  int iterations = 0;
  int inner_solves = 0;
  int inner_successes = 0;
  int commitment_steps = 0;
  int refinements = 0;
  std::vector<double> inner_solve_times;
  std::vector<Eigen::Index> inner_horizons;
  std::vector<RefinementRecord> refinement_log;
  double wall_time = 0.0;
};

struct PlanOutcome {
  bool success = false;
  Trajectory trajectory;
  std::optional<GraspPose> grasp;
  double cost = 0.0;
  double max_violation = 0.0;
  PlanStats stats;
};

/// Commits a prefix of the cheapest temporary trajectory (unless the cap
/// would be exceeded), tightens mu, and opens the next exploration round.
PlannerState commitment_step(PlannerState state, const PlannerParams& params);

/// Full-horizon initial guess: q_s, committed waypoints, then `solution`
/// without its first waypoint, resampled to n_0 rows when needed.
Trajectory refinement_init(const PlannerState& state, const Trajectory& solution,
                           Eigen::Index n_0);

/// Re-optimizes the concatenated trajectory over the full horizon at mu_max.
std::optional<Candidate> refine(const Arm& arm, const Scene& scene, const PlannerState& state,
                                const Trajectory& solution, const GraspPose& grasp,
                                const PlannerParams& params, const SolverOptions& options = {},
                                RefinementRecord* record = nullptr);

/// Called after every outer iteration with the iteration index and state.
using PlanObserver = std::function<void(int, const PlannerState&)>;

/// Variable-grasp outer loop with commitment and refinement.
PlanOutcome plan(const Arm& arm, const Scene& scene, const PlannerParams& params, Rng& rng,
                 const SolverOptions& options = {}, const PlanObserver& observer = {});

}  // namespace reachplan
