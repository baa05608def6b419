#pragma once

#include <cstdint>
#include <string_view>

#include "reachplan/planner.hpp"

namespace reachplan {

enum class MethodId { rrt_connect, fixed_goal, variable_single, variable_multi, ours };

inline constexpr MethodId kAllMethods[] = {MethodId::rrt_connect, MethodId::fixed_goal,
                                           MethodId::variable_single, MethodId::variable_multi,
                                           MethodId::ours};

std::string_view to_string(MethodId method);
MethodId parse_method(std::string_view text);
/// Display name used in report tables.
std::string_view display_name(MethodId method);

struct RrtOptions {
  double step = 0.1;
  int max_nodes = 20000;
  int ik_seeds = 20;
  IkOptions ik;
};

/// Declared grasp of the scene; throws when the scene has none.
GraspPose fixed_grasp(const Scene& scene);

/// One sampled grasp, one bidirectional RRT-Connect run in joint space. The
/// raw path is resampled to params.n_0 waypoints and costed unsmoothed.
PlanOutcome rrt_connect_plan(const Arm& arm, const Scene& scene, const PlannerParams& params,
                             Rng& rng, const RrtOptions& rrt = {},
                             const SolverOptions& options = {});

/// One optimizer run toward the scene's hand-picked grasp.
PlanOutcome fixed_goal_plan(const Arm& arm, const Scene& scene, const PlannerParams& params,
                            const SolverOptions& options = {});

/// One optimizer run toward one sampled grasp.
PlanOutcome variable_single_plan(const Arm& arm, const Scene& scene,
                                 const PlannerParams& params, Rng& rng,
                                 const SolverOptions& options = {});

/// `attempts` independent sampled-grasp runs; keeps the cheapest success.
PlanOutcome variable_multi_plan(const Arm& arm, const Scene& scene,
                                const PlannerParams& params, Rng& rng, int attempts = 5,
                                const SolverOptions& options = {});

struct MethodSettings {
  PlannerParams planner;
  SolverOptions solver;
  RrtOptions rrt;
  int multi_attempts = 5;
};

/// Runs `method` on `scene` with a fresh generator seeded by `seed`.
PlanOutcome run_method(MethodId method, const Scene& scene, std::uint64_t seed,
                       const MethodSettings& settings = {});

}  // namespace reachplan
