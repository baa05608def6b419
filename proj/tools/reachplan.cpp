#include <cstdio>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "reachplan/bench.hpp"
#include "reachplan/report.hpp"
#include "reachplan/scene_io.hpp"
#include "reachplan/svg.hpp"

#ifndef REACHPLAN_SCENE_DIR
#define REACHPLAN_SCENE_DIR "assets/scenes"
#endif

namespace {

using namespace reachplan;

constexpr int kExitPlanFailure = 1;
constexpr int kExitInputError = 2;

/// Bad user input: reported on stderr, exit code 2.
struct InputError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

Scene load(const std::string& arg, const std::string& scene_dir) {
  return load_scene(resolve_scene(arg, scene_dir));
}

std::string format_traj(const Trajectory& traj) {
  std::ostringstream out;
  out.precision(17);
  for (Eigen::Index i = 0; i < traj.size(); ++i) {
    for (Eigen::Index j = 0; j < traj.dof(); ++j)
      out << (j ? "," : "") << traj.waypoints(i, j);
    out << '\n';
  }
  return out.str();
}

int cmd_plan(const std::string& scene_arg, const std::string& scene_dir,
             const std::string& method_name, std::uint64_t seed, const std::string& svg_path,
             const std::string& traj_path) {
  const Scene scene = load(scene_arg, scene_dir);
  MethodId method;
  try {
    method = parse_method(method_name);
  } catch (const std::invalid_argument& e) {
    throw InputError(e.what());
  }
  const PlanOutcome out = run_method(method, scene, seed);
  std::printf("scene       %s\nmethod      %s\nseed        %llu\nsuccess     %s\n",
              scene.name.c_str(), std::string(to_string(method)).c_str(),
              static_cast<unsigned long long>(seed), out.success ? "yes" : "no");
  if (out.success) std::printf("cost        %.6f\n", out.cost);
  std::printf("violation   %.3e\ntime        %.4f s\niterations  %d\ncommitments %d\n",
              out.max_violation, out.stats.wall_time, out.stats.iterations,
              out.stats.commitment_steps);
  if (out.grasp) {
    const auto& g = *out.grasp;
    std::printf("grasp       x=%.4f y=%.4f phi=%.2f deg\n", g.pose.x(), g.pose.y(),
                rad_to_deg(g.pose.phi));
  }
  if (out.trajectory.size() > 0) {
    const std::optional<Pose2> marker =
        out.grasp ? std::optional<Pose2>(out.grasp->pose) : std::nullopt;
    if (!svg_path.empty()) plot_trajectory(scene.arm, scene, out.trajectory, svg_path, marker);
    if (!traj_path.empty()) write_text(traj_path, format_traj(out.trajectory));
  }
  return out.success ? 0 : kExitPlanFailure;
}

int cmd_bench(const std::vector<std::string>& scene_args, const std::string& scene_dir,
              const std::vector<std::string>& method_names, int trials, std::uint64_t seed,
              const std::string& format_name, const std::string& out_path, int workers) {
  std::vector<Scene> scenes;
  for (const auto& s : scene_args) scenes.push_back(load(s, scene_dir));
  std::vector<MethodId> methods;
  ReportFormat format;
  try {
    for (const auto& m : method_names) methods.push_back(parse_method(m));
    format = parse_report_format(format_name);
  } catch (const std::invalid_argument& e) {
    throw InputError(e.what());
  }
  if (trials < 1) throw InputError("--trials must be at least 1");
  const auto records = run_bench(scenes, methods, trials, seed, {}, workers);
  const std::string text = emit(aggregate(records, seed), format);
  if (out_path.empty())
    std::cout << text;
  else
    write_text(out_path, text);
  return 0;
}

int cmd_validate(const std::vector<std::string>& args, const std::string& scene_dir) {
  int status = 0;
  for (const auto& a : args) {
    try {
      const Scene s = load(a, scene_dir);
      std::printf("ok       %s (%zu obstacles, target %d)\n", s.name.c_str(), s.obstacles.size(),
                  s.target_id);
    } catch (const SceneError& e) {
      std::fprintf(stderr, "invalid  %s\n", e.what());
      status = kExitInputError;
    }
  }
  return status;
}

int cmd_show(const std::string& arg, const std::string& scene_dir, const std::string& svg_path) {
  const Scene s = load(arg, scene_dir);
  std::cout << emit_scene(s);
  if (!svg_path.empty()) {
    Eigen::MatrixXd start = s.start.transpose();
    plot_trajectory(s.arm, s, Trajectory(std::move(start)), svg_path,
                    s.fixed_grasp ? std::optional<Pose2>(
                                        grasp_to_pose(*s.fixed_grasp, s.target()))
                                  : std::nullopt);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Variable-grasp reaching trajectory planner for planar arms"};
  app.require_subcommand(1);
  std::string scene_dir = REACHPLAN_SCENE_DIR;
  app.add_option("--scene-dir", scene_dir, "Directory holding the shipped scenes");

  auto* plan = app.add_subcommand("plan", "Plan one reaching trajectory");
  std::string scene_arg;
  std::string method_name = "ours";
  std::uint64_t seed = 0;
  std::string svg_path;
  std::string traj_path;
  plan->add_option("--scene", scene_arg, "Scene name or JSON path")->required();
  plan->add_option("--method", method_name,
                   "rrt_connect | fixed_goal | variable_single | variable_multi | ours");
  plan->add_option("--seed", seed, "Random seed");
  plan->add_option("--out-svg", svg_path, "Write an SVG plot of the trajectory");
  plan->add_option("--out-traj", traj_path, "Write waypoints (radians) as CSV rows");

  auto* bench = app.add_subcommand("bench", "Run seeded trials and report aggregates");
  std::vector<std::string> scenes = shipped_scene_names();
  std::vector<std::string> methods;
  for (const MethodId m : kAllMethods) methods.emplace_back(to_string(m));
  int trials = 100;
  std::uint64_t bench_seed = 0;
  std::string format = "csv";
  std::string out_path;
  int workers = 0;
  bench->add_option("--scenes", scenes, "Scene names or paths")->delimiter(',');
  bench->add_option("--methods", methods, "Methods to run")->delimiter(',');
  bench->add_option("--trials", trials, "Trials per (scene, method)");
  bench->add_option("--seed", bench_seed, "Base seed; trial i uses seed + i");
  bench->add_option("--format", format, "csv | markdown");
  bench->add_option("--out", out_path, "Output file (default stdout)");
  bench->add_option("--workers", workers,
                    "Worker threads (default REACHPLAN_WORKERS or the core count)");

  auto* scene = app.add_subcommand("scene", "Inspect scene files");
  scene->require_subcommand(1);
  auto* validate = scene->add_subcommand("validate", "Check scene files against the schema");
  std::vector<std::string> validate_args;
  validate->add_option("scenes", validate_args, "Scene names or paths")->required();
  auto* show = scene->add_subcommand("show", "Print the normalized scene document");
  std::string show_arg;
  std::string show_svg;
  show->add_option("scene", show_arg, "Scene name or path")->required();
  show->add_option("--out-svg", show_svg, "Also draw the scene at its start pose");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return e.get_exit_code() == 0 ? code : kExitInputError;
  }

  try {
    if (*plan) return cmd_plan(scene_arg, scene_dir, method_name, seed, svg_path, traj_path);
    if (*bench)
      return cmd_bench(scenes, scene_dir, methods, trials, bench_seed, format, out_path, workers);
    if (*validate) return cmd_validate(validate_args, scene_dir);
    if (*show) return cmd_show(show_arg, scene_dir, show_svg);
  } catch (const SceneError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitInputError;
  } catch (const InputError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitInputError;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitInputError;
  }
  return 0;
}
