#include "reachplan/planner.hpp"

#include <chrono>
#include <cmath>
#include <stdexcept>

namespace reachplan {

void PlannerParams::validate() const {
  if (!(mu_max > 0.0)) throw std::invalid_argument("mu_max must be positive");
  if (!(mu_0 >= mu_max)) throw std::invalid_argument("mu_0 must be at least mu_max");
  if (max_iters < 0) throw std::invalid_argument("max_iters must be non-negative");
  if (n_0 < 3) throw std::invalid_argument("n_0 must be at least 3");
  if (!(commit_fraction > 0.0 && commit_fraction < 1.0))
    throw std::invalid_argument("commit fraction must lie in (0, 1)");
  if (!(commit_cap > 0.0 && commit_cap < 1.0))
    throw std::invalid_argument("commit cap must lie in (0, 1)");
  if (!(mu_decay > 0.0 && mu_decay < 1.0))
    throw std::invalid_argument("mu decay must lie in (0, 1)");
}

PlannerState PlannerState::initial(const JointConfig& q_s, const PlannerParams& params) {
  PlannerState state;
  state.q_s = q_s;
  state.q0 = q_s;
  state.mu = params.mu_0;
  state.n = params.n_0;
  state.committed.resize(0, q_s.size());
  return state;
}

Eigen::MatrixXd PlannerState::seam_prefix() const {
  const Eigen::Index c = committed.rows();
  if (c == 0) return Eigen::MatrixXd(0, q_s.size());
  // Path so far is q_s, committed[0..c-1]; q0 = committed[c-1].
  Eigen::MatrixXd path(c + 1, q_s.size());
  path.row(0) = q_s.transpose();
  path.bottomRows(c) = committed;
  const Eigen::Index rows = std::min<Eigen::Index>(2, c);
  return path.middleRows(c - rows, rows);
}

PlannerState commitment_step(PlannerState state, const PlannerParams& params) {
  if (state.s != state.s_thres || state.temp.empty())
    throw std::logic_error("commitment step requires s == s_thres and a non-empty temp list");
  const TempEntry* best = &state.temp.front();
  for (const auto& entry : state.temp)
    if (entry.cost < best->cost) best = &entry;

  const Eigen::Index k = std::max<Eigen::Index>(
      1, std::llround(params.commit_fraction * static_cast<double>(state.n)));
  const double cap = params.commit_cap * static_cast<double>(params.n_0);
  const bool fits = static_cast<double>(state.committed.rows() + k) <= cap &&
                    k <= best->trajectory.size() - 2;
  if (fits) {
    const Eigen::Index c = state.committed.rows();
    Eigen::MatrixXd grown(c + k, state.committed.cols());
    grown.topRows(c) = state.committed;
    grown.bottomRows(k) = best->trajectory.waypoints.middleRows(1, k);
    state.committed = std::move(grown);
    state.q0 = state.committed.row(c + k - 1).transpose();
    state.n = params.n_0 - state.committed.rows();
  }
  double mu = std::max(params.mu_max, params.mu_decay * state.mu);
  if (mu <= params.mu_max * (1.0 + 1e-9)) mu = params.mu_max;
  state.mu = mu;
  state.s_thres += 1;
  state.s = 0;
  state.temp.clear();
  return state;
}

Trajectory refinement_init(const PlannerState& state, const Trajectory& solution,
                           Eigen::Index n_0) {
  const Eigen::Index c = state.committed.rows();
  Eigen::MatrixXd rows(1 + c + solution.size() - 1, state.q_s.size());
  rows.row(0) = state.q_s.transpose();
  if (c > 0) rows.middleRows(1, c) = state.committed;
  rows.bottomRows(solution.size() - 1) = solution.waypoints.bottomRows(solution.size() - 1);
  Trajectory joined(std::move(rows));
  if (joined.size() == n_0) return joined;
  return resample_by_arc_length(joined, n_0);
}

std::optional<Candidate> refine(const Arm& arm, const Scene& scene, const PlannerState& state,
                                const Trajectory& solution, const GraspPose& grasp,
                                const PlannerParams& params, const SolverOptions& options,
                                RefinementRecord* record) {
  SolveQuery query;
  query.start = state.q_s;
  query.goal = grasp.pose;
  query.init = refinement_init(state, solution, params.n_0);
  query.tolerance = params.mu_max;
  query.waypoints = params.n_0;
  const auto result = solve(arm, scene, query, options);
  if (record != nullptr) {
    record->init_cost = trajectory_cost(query.init, {}, options.weights);
    record->init_violation = measure_violation(arm, scene, query.goal, query.init,
                                               options.feasibility_resolution,
                                               options.collision_margin)
                                 .max();
    record->success = result.success;
    record->refined_cost = result.cost;
    record->refined_violation = result.max_violation;
  }
  if (!result.success) return std::nullopt;
  return Candidate{result.trajectory, result.cost, grasp};
}

PlanOutcome plan(const Arm& arm, const Scene& scene, const PlannerParams& params, Rng& rng,
                 const SolverOptions& options, const PlanObserver& observer) {
  const auto t0 = std::chrono::steady_clock::now();
  params.validate();
  PlanOutcome outcome;
  PlannerState state = PlannerState::initial(scene.start, params);
  const auto& target = scene.target();

  for (int iter = 0; iter < params.max_iters; ++iter) {
    ++outcome.stats.iterations;
    const GraspPose grasp = sample_grasp(target, scene.target_id, rng, scene.grasp);
    SolveQuery query;
    query.start = state.q0;
    query.goal = grasp.pose;
    query.init = linear_init(arm, state.q0, grasp.pose, state.n);
    query.tolerance = state.mu;
    query.waypoints = state.n;
    query.fixed_prefix = state.seam_prefix();
    const auto result = solve(arm, scene, query, options);
    ++outcome.stats.inner_solves;
    outcome.stats.inner_solve_times.push_back(result.wall_time);
    outcome.stats.inner_horizons.push_back(state.n);

    if (result.success) {
      ++outcome.stats.inner_successes;
      state.temp.push_back({result.trajectory, grasp, result.cost});
      state.s += 1;
      if (state.mu <= params.mu_max) {
        ++outcome.stats.refinements;
        RefinementRecord record;
        if (auto candidate =
                refine(arm, scene, state, result.trajectory, grasp, params, options, &record)) {
          state.candidates.push_back(std::move(*candidate));
        }
        outcome.stats.refinement_log.push_back(record);
      }
      if (state.s == state.s_thres) {
        state = commitment_step(std::move(state), params);
        ++outcome.stats.commitment_steps;
      }
    }
    if (observer) observer(iter, state);
  }

  const Candidate* best = nullptr;
  for (const auto& candidate : state.candidates)
    if (best == nullptr || candidate.cost < best->cost) best = &candidate;
  if (best != nullptr) {
    outcome.success = true;
    outcome.trajectory = best->trajectory;
    outcome.grasp = best->grasp;
    outcome.cost = best->cost;
    outcome.max_violation = measure_violation(arm, scene, best->grasp.pose, best->trajectory,
                                              options.feasibility_resolution,
                                              options.collision_margin)
                                .max();
  }
  outcome.stats.wall_time =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return outcome;
}

}  // namespace reachplan
