#include <doctest.h>

#include "reachplan/baselines.hpp"
#include "reachplan/clearance.hpp"
#include "reachplan/scene_io.hpp"
#include "support.hpp"

using namespace reachplan;

namespace {

TempEntry entry(const Trajectory& t, double cost) { return TempEntry{t, GraspPose{}, cost}; }

Trajectory ramp(Eigen::Index n, Eigen::Index dof, double offset = 0.0) {
  Eigen::MatrixXd rows(n, dof);
  for (Eigen::Index i = 0; i < n; ++i) rows.row(i).setConstant(offset + static_cast<double>(i));
  return Trajectory(rows);
}

Scene enclosed_scene() {
  Scene s = support::open_scene(Point2(0.8, 0.3));
  using Obs = Obstacle<double>;
  // Walls 0.08 m clear of every target face.
  s.obstacles.push_back(Obs::rect(Point2(0.65, 0.3), Point2(0.02, 0.17)));
  s.obstacles.push_back(Obs::rect(Point2(0.95, 0.3), Point2(0.02, 0.17)));
  s.obstacles.push_back(Obs::rect(Point2(0.8, 0.45), Point2(0.17, 0.02)));
  s.obstacles.push_back(Obs::rect(Point2(0.8, 0.15), Point2(0.17, 0.02)));
  return s;
}

}  // namespace

TEST_CASE("planner parameter validation") {
  PlannerParams p;
  CHECK_NOTHROW(p.validate());
  CHECK(p.mu_0 == doctest::Approx(100 * p.mu_max));
  CHECK(std::pow(p.mu_decay, 5) == doctest::Approx(0.01));
  p.mu_0 = 0.5 * p.mu_max;
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
  p = {};
  p.commit_fraction = 1.0;
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
  p = {};
  p.commit_cap = 0.0;
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
  p = {};
  p.mu_decay = 1.0;
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
  p = {};
  p.mu_max = 0.0;
  p.mu_0 = 0.0;
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
}

TEST_CASE("commitment step commits round(f n) waypoints of the cheapest entry") {
  PlannerParams params;
  params.n_0 = 10;
  params.commit_fraction = 0.3;
  PlannerState state = PlannerState::initial(JointConfig::Zero(2), params);
  state.temp = {entry(ramp(10, 2, 5.0), 3.0)};
  state.s = 1;
  const PlannerState next = commitment_step(state, params);
  REQUIRE(next.committed_count() == 3);
  CHECK(next.committed == state.temp[0].trajectory.waypoints.middleRows(1, 3));
  CHECK(next.q0 == JointConfig(next.committed.row(2).transpose()));
  CHECK(next.n == 7);
  CHECK(next.s_thres == 2);
  CHECK(next.s == 0);
  CHECK(next.temp.empty());
  CHECK(next.mu == doctest::Approx(params.mu_decay * params.mu_0));

  // Cheapest of several entries; f n = 2.1 rounds to 2.
  PlannerState second = next;
  second.temp = {entry(ramp(7, 2, 100.0), 5.0), entry(ramp(7, 2, 200.0), 1.0),
                 entry(ramp(7, 2, 300.0), 1.0)};
  second.s = 2;
  const PlannerState third = commitment_step(second, params);
  REQUIRE(third.committed_count() == 5);
  CHECK(third.committed.bottomRows(2) == second.temp[1].trajectory.waypoints.middleRows(1, 2));
  CHECK(third.n == 5);
  CHECK(third.s_thres == 3);
}

TEST_CASE("commitment step at the cap only updates the schedule") {
  PlannerParams params;
  params.n_0 = 10;
  params.commit_fraction = 0.3;
  PlannerState state = PlannerState::initial(JointConfig::Zero(2), params);
  state.committed = ramp(5, 2).waypoints;
  state.q0 = state.committed.row(4).transpose();
  state.n = 5;
  state.s_thres = 4;
  state.s = 4;
  state.mu = 0.2;
  state.temp = {entry(ramp(5, 2, 50.0), 1.0)};
  const PlannerState next = commitment_step(state, params);
  CHECK(next.committed == state.committed);
  CHECK(next.q0 == state.q0);
  CHECK(next.n == 5);
  CHECK(next.mu == doctest::Approx(0.2 * params.mu_decay));
  CHECK(next.s_thres == 5);
  CHECK(next.s == 0);
  CHECK(next.temp.empty());
}

TEST_CASE("commitment step keeps mu at its floor") {
  PlannerParams params;
  PlannerState state = PlannerState::initial(JointConfig::Zero(2), params);
  state.mu = params.mu_max;
  state.s = 1;
  state.temp = {entry(ramp(30, 2), 1.0)};
  CHECK(commitment_step(state, params).mu == params.mu_max);
  state.mu = 1.5 * params.mu_max;
  CHECK(commitment_step(state, params).mu == params.mu_max);
}

TEST_CASE("commitment step preconditions") {
  PlannerParams params;
  PlannerState state = PlannerState::initial(JointConfig::Zero(2), params);
  state.temp = {entry(ramp(30, 2), 1.0)};
  CHECK_THROWS_AS(commitment_step(state, params), std::logic_error);
  state.s = 1;
  state.temp.clear();
  CHECK_THROWS_AS(commitment_step(state, params), std::logic_error);
}

TEST_CASE("seam prefix holds up to two waypoints before q0") {
  PlannerParams params;
  PlannerState state = PlannerState::initial(JointConfig::Constant(2, -1.0), params);
  CHECK(state.seam_prefix().rows() == 0);
  state.committed = ramp(1, 2).waypoints;
  Eigen::MatrixXd prefix = state.seam_prefix();
  REQUIRE(prefix.rows() == 1);
  CHECK(prefix.row(0) == state.q_s.transpose());
  state.committed = ramp(4, 2).waypoints;
  prefix = state.seam_prefix();
  REQUIRE(prefix.rows() == 2);
  CHECK(prefix == state.committed.middleRows(1, 2));
}

TEST_CASE("refinement init concatenates and preserves endpoints") {
  PlannerParams params;
  params.n_0 = 12;
  PlannerState state = PlannerState::initial(JointConfig::Constant(3, -0.5), params);
  state.committed = ramp(4, 3, 0.25).waypoints;
  state.q0 = state.committed.row(3).transpose();
  Trajectory solution = ramp(8, 3, 3.25);
  solution.waypoints.row(7) << 0.123456789, -2.5, 7.75;

  const Trajectory joined = refinement_init(state, solution, 12);
  REQUIRE(joined.size() == 12);
  CHECK(joined.front() == state.q_s);
  CHECK(joined.waypoints.middleRows(1, 4) == state.committed);
  CHECK(joined.waypoints.bottomRows(7) == solution.waypoints.bottomRows(7));

  const Trajectory resampled = refinement_init(state, solution, 20);
  REQUIRE(resampled.size() == 20);
  CHECK(resampled.front() == state.q_s);
  CHECK(resampled.back() == solution.back());
}

TEST_CASE("refinement with nothing committed never raises a feasible cost") {
  const Scene scene = load_scene(resolve_scene("box_table", REACHPLAN_SCENE_DIR));
  PlannerParams params;
  const PlannerState state = PlannerState::initial(scene.start, params);
  Rng rng(2);
  int checked = 0;
  for (int i = 0; i < 30 && checked < 4; ++i) {
    const GraspPose g = sample_grasp(scene.target(), scene.target_id, rng, scene.grasp);
    SolveQuery query;
    query.start = scene.start;
    query.goal = g.pose;
    query.waypoints = params.n_0;
    query.tolerance = params.mu_max;
    query.init = linear_init(scene.arm, scene.start, g.pose, params.n_0);
    const auto solved = solve(scene.arm, scene, query);
    if (!solved.success) continue;
    RefinementRecord record;
    const auto candidate = refine(scene.arm, scene, state, solved.trajectory, g, params, {}, &record);
    REQUIRE(candidate.has_value());
    CHECK(record.init_cost == doctest::Approx(solved.cost));
    CHECK(candidate->cost <= solved.cost + 1e-9);
    CHECK(candidate->trajectory.size() == params.n_0);
    CHECK(candidate->trajectory.front() == scene.start);
    ++checked;
  }
  CHECK(checked > 0);
}

TEST_CASE("refinement repairs a concatenation that clips an obstacle") {
  Scene scene = support::open_scene();
  const Arm& arm = scene.arm;
  JointConfig goal_q = scene.start;
  goal_q << 0.6, -0.2, -0.6, -0.4, 0.3;
  const Trajectory solution = linear_interpolation(scene.start, goal_q, 30);
  // A disc beside the swept region whose radius makes the densely checked
  // path sink exactly 0.02 m into it, with both end configurations free.
  const double depth = 0.02;
  bool placed = false;
  for (Eigen::Index w = 5; w <= 25 && !placed; w += 5) {
    const auto frames = forward_kinematics(arm, solution.waypoint(w));
    for (std::size_t l = 1; l < 5 && !placed; ++l) {
      const Point2 mid = 0.5 * (frames.points[l] + frames.points[l + 1]);
      const Point2 side = perp(Point2(frames.points[l + 1] - frames.points[l])).normalized();
      for (double offset = 0.08; offset < 0.4 && !placed; offset += 0.04) {
        for (const double sign : {1.0, -1.0}) {
          Scene probe = scene;
          probe.obstacles.push_back(Obstacle<double>::disc(Point2(mid + sign * offset * side), 0.0));
          const double gap = trajectory_clearance(arm, solution, probe, 0.005).min_distance;
          if (gap < 0.05) continue;
          probe.obstacles.back().radius = gap + depth;
          if (config_clearance(arm, scene.start, probe, false).min_distance <= 0.0 ||
              config_clearance(arm, goal_q, probe, false).min_distance <= 0.0)
            continue;
          scene = probe;
          placed = true;
          break;
        }
      }
    }
  }
  REQUIRE(placed);
  REQUIRE(config_clearance(arm, scene.start, scene, false).min_distance > 0.0);
  REQUIRE(config_clearance(arm, goal_q, scene, false).min_distance > 0.0);

  PlannerParams params;
  const GraspPose grasp{forward_kinematics(arm, goal_q).ee, {}, scene.target_id};
  RefinementRecord record;
  const auto candidate = refine(arm, scene, PlannerState::initial(scene.start, params), solution,
                                grasp, params, {}, &record);
  CHECK(record.init_violation == doctest::Approx(depth).epsilon(1e-9));
  REQUIRE(record.init_violation > params.mu_max);
  REQUIRE(record.init_violation < params.mu_0);
  INFO("init ", record.init_violation, " refined ", record.refined_violation);
  REQUIRE(candidate.has_value());
  CHECK(record.success);
  CHECK(record.refined_violation <= params.mu_max);
  CHECK(measure_violation(arm, scene, grasp.pose, candidate->trajectory, 0.005).max() <= params.mu_max);
}

TEST_CASE("one iteration at mu_max equals a single variable-goal solve plus refinement") {
  const Scene scene = support::open_scene();
  PlannerParams params;
  params.max_iters = 1;
  params.mu_0 = params.mu_max;
  for (const std::uint64_t seed : {1u, 2u, 3u}) {
    Rng plan_rng(seed);
    const PlanOutcome outcome = plan(scene.arm, scene, params, plan_rng);

    Rng base_rng(seed);
    const PlanOutcome single = variable_single_plan(scene.arm, scene, params, base_rng);
    REQUIRE(single.success);
    const auto candidate = refine(scene.arm, scene, PlannerState::initial(scene.start, params),
                                  single.trajectory, *single.grasp, params);
    REQUIRE(candidate.has_value());
    REQUIRE(outcome.success);
    CHECK(outcome.trajectory == candidate->trajectory);
    CHECK(outcome.cost == candidate->cost);
    CHECK(outcome.grasp->params == single.grasp->params);
    CHECK(outcome.stats.iterations == 1);
    CHECK(outcome.stats.refinements == 1);
    CHECK(outcome.stats.commitment_steps == 1);
  }
}

TEST_CASE("an enclosed target yields no candidates") {
  const Scene scene = enclosed_scene();
  REQUIRE(config_clearance(scene.arm, scene.start, scene, true).min_distance > 0.0);
  PlannerParams params;
  params.max_iters = 8;
  Rng rng(5);
  std::size_t candidates = 0;
  const auto outcome = plan(scene.arm, scene, params, rng, {},
                            [&](int, const PlannerState& s) { candidates += s.candidates.size(); });
  CHECK_FALSE(outcome.success);
  CHECK(candidates == 0);
  CHECK(outcome.stats.iterations == params.max_iters);
}

TEST_CASE("plan is deterministic for a seed") {
  const Scene scene = load_scene(resolve_scene("box_table", REACHPLAN_SCENE_DIR));
  PlannerParams params;
  params.max_iters = 20;
  Rng a(11), b(11);
  const auto first = plan(scene.arm, scene, params, a);
  const auto second = plan(scene.arm, scene, params, b);
  CHECK(first.success == second.success);
  CHECK(first.trajectory == second.trajectory);
  CHECK(first.cost == second.cost);
  CHECK(first.stats.iterations == second.stats.iterations);
  CHECK(first.stats.inner_successes == second.stats.inner_successes);
  CHECK(first.stats.commitment_steps == second.stats.commitment_steps);
  CHECK(first.stats.refinements == second.stats.refinements);
  CHECK(first.stats.inner_horizons == second.stats.inner_horizons);
}

TEST_CASE("plan loop invariants and candidate selection") {
  const Scene scene = load_scene(resolve_scene("box_table", REACHPLAN_SCENE_DIR));
  const PlannerParams params;
  Rng rng(3);
  double last_mu = params.mu_0;
  int last_thres = 1;
  std::vector<Candidate> final_candidates;
  int observed = 0;
  const auto outcome = plan(scene.arm, scene, params, rng, {}, [&](int iter, const PlannerState& s) {
    CHECK(iter == observed++);
    CHECK(s.committed_count() + s.n == params.n_0);
    CHECK(s.committed_count() <= params.commit_cap * static_cast<double>(params.n_0));
    CHECK(s.mu <= last_mu);
    CHECK(s.mu >= params.mu_max);
    CHECK(s.s <= s.s_thres);
    CHECK(s.temp.size() <= static_cast<std::size_t>(s.s_thres));
    CHECK(s.s_thres - last_thres >= 0);
    CHECK(s.s_thres - last_thres <= 1);
    last_mu = s.mu;
    last_thres = s.s_thres;
    final_candidates = s.candidates;
  });
  CHECK(observed == params.max_iters);
  CHECK(outcome.stats.commitment_steps == last_thres - 1);
  CHECK(outcome.stats.inner_solves == params.max_iters);
  REQUIRE(outcome.success);
  for (const auto& c : final_candidates) {
    CHECK(c.trajectory.size() == params.n_0);
    CHECK(c.trajectory.front() == scene.start);
    CHECK(measure_violation(scene.arm, scene, c.grasp.pose, c.trajectory, 0.005).max() <= params.mu_max);
  }
  const auto best = std::min_element(final_candidates.begin(), final_candidates.end(),
                                     [](const Candidate& x, const Candidate& y) { return x.cost < y.cost; });
  CHECK(outcome.cost == best->cost);
  CHECK(outcome.trajectory == best->trajectory);
  CHECK(outcome.max_violation <= params.mu_max);
}
