#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <regex>
#include <sstream>

#include "reachplan/bench.hpp"
#include "reachplan/clearance.hpp"
#include "reachplan/report.hpp"
#include "reachplan/scene_io.hpp"
#include "reachplan/svg.hpp"
#include "support.hpp"

using namespace reachplan;
namespace fs = std::filesystem;

namespace {

Scene shipped(const std::string& name) { return load_scene(resolve_scene(name, REACHPLAN_SCENE_DIR)); }

std::string scene_json(const std::string& obstacles, const std::string& start = "[90, -140, 140, -140, 100]",
                       const std::string& extra = "") {
  return R"({"name": "t", "obstacles": [)" + obstacles + R"(], "start_deg": )" + start + extra + "}";
}

const std::string kSlab = R"({"kind": "rect", "center": [0.85, -0.45], "half_extents": [0.5, 0.15]})";
const std::string kTarget =
    R"({"kind": "rect", "center": [0.85, -0.225], "half_extents": [0.075, 0.075], "is_target": true})";

std::string error_of(const std::string& text) {
  try {
    parse_scene(text);
  } catch (const SceneError& e) {
    return e.what();
  }
  return "";
}

TrialRecord record(MethodId m, std::uint64_t seed, std::optional<double> cost, double time,
                   const std::string& scene = "fixture") {
  TrialRecord r;
  r.scene = scene;
  r.method = m;
  r.seed = seed;
  r.success = cost.has_value();
  r.cost = cost;
  r.wall_time = time;
  return r;
}

/// Minimal XML well-formedness check: balanced tags, quoted attributes.
bool well_formed_xml(const std::string& text) {
  std::vector<std::string> stack;
  std::size_t i = 0;
  bool root_closed = false;
  while ((i = text.find('<', i)) != std::string::npos) {
    const std::size_t end = text.find('>', i);
    if (end == std::string::npos) return false;
    std::string tag = text.substr(i + 1, end - i - 1);
    i = end + 1;
    if (tag.rfind("?", 0) == 0 || tag.rfind("!--", 0) == 0) continue;
    if (root_closed) return false;
    if (std::count(tag.begin(), tag.end(), '"') % 2 != 0) return false;
    if (tag.front() == '/') {
      if (stack.empty() || stack.back() != tag.substr(1)) return false;
      stack.pop_back();
      root_closed = stack.empty();
      continue;
    }
    const bool self_closing = tag.back() == '/';
    const std::string name = tag.substr(0, tag.find_first_of(" /"));
    if (!self_closing) stack.push_back(name);
  }
  return stack.empty() && root_closed;
}

int count_of(const std::string& text, const std::string& needle) {
  int n = 0;
  for (std::size_t at = text.find(needle); at != std::string::npos; at = text.find(needle, at + 1)) ++n;
  return n;
}

int run_cli(const std::string& args, const fs::path& out = {}) {
  std::string cmd = std::string("\"") + REACHPLAN_CLI + "\" " + args;
  cmd += out.empty() ? " > /dev/null 2>&1" : " > \"" + out.string() + "\" 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "reachplan_tests";
  fs::create_directories(dir);
  return dir / name;
}

}  // namespace

TEST_CASE("shipped scenes load and validate") {
  for (const auto& name : shipped_scene_names()) {
    const Scene s = shipped(name);
    CHECK(s.name == name);
    CHECK(s.target().is_target);
    CHECK(s.arm.within_limits(s.start));
    CHECK(config_clearance(s.arm, s.start, s, true).min_distance > 0.0);
    CHECK_NOTHROW(validate_scene(s));
  }
  // The table scene starts folded: every joint after the first bent hard.
  const Scene table = shipped("box_table");
  CHECK(table.start.tail(4).cwiseAbs().minCoeff() >= deg_to_rad(90));
  CHECK(shipped("cylinder_1").target().kind == ObstacleKind::disc);
  CHECK_THROWS_AS(resolve_scene("no_such_scene", REACHPLAN_SCENE_DIR), SceneError);
}

TEST_CASE("scene validation rejects broken documents") {
  CHECK(error_of(scene_json(kSlab + "," + kTarget)).empty());

  std::string twice = kTarget;
  twice.replace(twice.find("0.85"), 4, "1.30");
  CHECK(error_of(scene_json(kSlab + "," + kTarget + "," + twice)).find("exactly one target") !=
        std::string::npos);
  CHECK(error_of(scene_json(kSlab)).find("target") != std::string::npos);
  CHECK(error_of(scene_json(kSlab + "," + kTarget, "[0, 0, 0]")).find("start_deg") == 0);
  CHECK(error_of(scene_json(kSlab + "," + kTarget, "[0, 170, 0, 0, 0]")).find("joint limits") !=
        std::string::npos);

  const std::string flat = R"({"kind": "rect", "center": [2, 2], "half_extents": [0.1, 0.0]})";
  CHECK(error_of(scene_json(kSlab + "," + kTarget + "," + flat)).find("obstacles[2]") == 0);
  const std::string dot = R"({"kind": "disc", "center": [2, 2], "radius": 0.0})";
  CHECK(error_of(scene_json(kSlab + "," + kTarget + "," + dot)).find("zero-thickness disc") !=
        std::string::npos);
  const std::string nameless = R"({"kind": "disc", "center": [2, 2]})";
  CHECK(error_of(scene_json(kSlab + "," + kTarget + "," + nameless)).find("obstacles[2].radius") == 0);
  const std::string odd = R"({"kind": "hexagon", "center": [2, 2]})";
  CHECK(error_of(scene_json(kSlab + "," + kTarget + "," + odd)).find("obstacles[2].kind") == 0);

  CHECK(error_of(scene_json(kSlab + "," + kTarget, "[90, -140, 140, -140, 100]",
                            R"(, "fixed_grasp": {"side": "top", "theta_deg": 90, "s": 0.5})"))
            .find("fixed_grasp.s") == 0);
  CHECK(error_of(scene_json(kSlab + "," + kTarget, "[90, -140, 140, -140, 100]",
                            R"(, "grasp": {"overlap_ratio": 0})"))
            .find("grasp.overlap_ratio") == 0);
  CHECK(error_of("{\"name\": \"t\",\n \"obstacles\": [,]}").find("line 2, column") == 0);
}

TEST_CASE("a start inside an obstacle is rejected") {
  const std::string block = R"({"kind": "rect", "center": [0.0, 0.2], "half_extents": [0.1, 0.1]})";
  const std::string err = error_of(scene_json(kSlab + "," + kTarget + "," + block, "[90, 0, 0, 0, 0]"));
  CHECK(err.find("start_deg") == 0);
  CHECK(err.find("collides") != std::string::npos);
}

TEST_CASE("scene documents round trip field for field") {
  auto scenes = std::vector<Scene>{};
  for (const auto& name : shipped_scene_names()) scenes.push_back(shipped(name));
  Scene custom = support::open_scene();
  custom.arm.base = Pose2(0.1, -0.2, 0.3);
  custom.arm.link_radius = 0.015;
  custom.grasp.overlap_ratio = 0.7;
  custom.bounds = Workspace{Point2(-2, -2), Point2(2, 2)};
  scenes.push_back(custom);
  for (const Scene& s : scenes) {
    const Scene r = parse_scene(emit_scene(s));
    CHECK(r.name == s.name);
    CHECK(r.arm.link_lengths == s.arm.link_lengths);
    CHECK((r.arm.joint_lower - s.arm.joint_lower).cwiseAbs().maxCoeff() < 1e-12);
    CHECK((r.arm.joint_upper - s.arm.joint_upper).cwiseAbs().maxCoeff() < 1e-12);
    CHECK(r.arm.base.position == s.arm.base.position);
    CHECK(r.arm.base.phi == doctest::Approx(s.arm.base.phi).epsilon(1e-12));
    CHECK(r.arm.gripper_standoff == s.arm.gripper_standoff);
    CHECK(r.arm.link_radius == s.arm.link_radius);
    CHECK(r.obstacles == s.obstacles);
    CHECK(r.target_id == s.target_id);
    CHECK((r.start - s.start).cwiseAbs().maxCoeff() < 1e-12);
    CHECK(r.bounds == s.bounds);
    CHECK(r.grasp == s.grasp);
    REQUIRE(r.fixed_grasp.has_value() == s.fixed_grasp.has_value());
    if (s.fixed_grasp) {
      CHECK(r.fixed_grasp->side == s.fixed_grasp->side);
      CHECK(r.fixed_grasp->theta == doctest::Approx(s.fixed_grasp->theta).epsilon(1e-12));
      CHECK(r.fixed_grasp->alpha == doctest::Approx(s.fixed_grasp->alpha).epsilon(1e-12));
      CHECK(r.fixed_grasp->s == s.fixed_grasp->s);
      CHECK(r.fixed_grasp->standoff == s.fixed_grasp->standoff);
    }
  }
}

TEST_CASE("run_trials is deterministic, counted and seeded by index") {
  const Scene scene = shipped("cylinder_2");
  MethodSettings settings;
  settings.planner.max_iters = 5;
  for (const MethodId m : {MethodId::variable_single, MethodId::ours, MethodId::rrt_connect}) {
    const auto a = run_trials(scene, m, 2, 40, settings, 1);
    const auto b = run_trials(scene, m, 2, 40, settings, 2);
    REQUIRE(a.size() == 2);
    REQUIRE(b.size() == 2);
    for (std::size_t i = 0; i < 2; ++i) {
      CHECK(a[i].seed == 40 + i);
      CHECK(a[i].method == m);
      CHECK(a[i].scene == scene.name);
      CHECK(a[i].success == b[i].success);
      CHECK(a[i].cost == b[i].cost);
      CHECK(a[i].cost.has_value() == a[i].success);
      CHECK(a[i].wall_time > 0.0);
    }
  }
  const auto fixed = run_trials(scene, MethodId::fixed_goal, 3, 0, settings, 1);
  REQUIRE(fixed.size() == 3);
  CHECK(fixed[1].success == fixed[0].success);
  CHECK(fixed[2].success == fixed[0].success);
  CHECK(fixed[1].cost == fixed[0].cost);
  CHECK(fixed[2].cost == fixed[0].cost);
  CHECK_THROWS_AS(run_trials(scene, MethodId::ours, 0, 0, settings), std::invalid_argument);
}

TEST_CASE("run_bench orders records by scene, method, seed") {
  const std::vector<Scene> scenes = {shipped("cylinder_2"), shipped("box_table")};
  const std::vector<MethodId> methods = {MethodId::variable_single, MethodId::fixed_goal};
  const auto records = run_bench(scenes, methods, 3, 7, {}, 2);
  REQUIRE(records.size() == 12);
  std::size_t i = 0;
  for (const auto& s : scenes)
    for (const MethodId m : methods)
      for (std::uint64_t k = 0; k < 3; ++k, ++i) {
        CHECK(records[i].scene == s.name);
        CHECK(records[i].method == m);
        CHECK(records[i].seed == 7 + k);
      }
}

TEST_CASE("worker count honours the environment") {
  ::setenv("REACHPLAN_WORKERS", "3", 1);
  CHECK(default_worker_count() == 3);
  ::setenv("REACHPLAN_WORKERS", "zero", 1);
  CHECK(default_worker_count() >= 1);
  ::unsetenv("REACHPLAN_WORKERS");
  CHECK(default_worker_count() >= 1);
}

TEST_CASE("aggregate arithmetic") {
  auto report = aggregate({record(MethodId::ours, 0, 1.0, 0.5), record(MethodId::ours, 1, std::nullopt, 1.5)});
  REQUIRE(report.cells.size() == 1);
  CHECK(report.cells[0].success_pct == doctest::Approx(50.0));
  CHECK(*report.cells[0].cost_mean == doctest::Approx(1.0));
  CHECK(*report.cells[0].cost_std == 0.0);
  CHECK(report.cells[0].time_mean == doctest::Approx(1.0));

  report = aggregate({record(MethodId::ours, 0, std::nullopt, 0.5), record(MethodId::ours, 1, std::nullopt, 0.5)});
  CHECK(report.cells[0].success_pct == 0.0);
  CHECK_FALSE(report.cells[0].cost_mean.has_value());
  CHECK_FALSE(report.cells[0].cost_std.has_value());
  CHECK_THROWS_AS(aggregate({}), std::invalid_argument);
}

TEST_CASE("aggregate matches a hand recomputation of a 10-record fixture") {
  const std::vector<std::optional<double>> costs = {1.0, std::nullopt, 2.0, 4.0, std::nullopt,
                                                    3.0, 5.0, std::nullopt, 2.5, 3.5};
  std::vector<TrialRecord> records;
  for (std::size_t i = 0; i < costs.size(); ++i)
    records.push_back(record(MethodId::variable_multi, i, costs[i], 0.1 * static_cast<double>(i + 1)));
  records.push_back(record(MethodId::ours, 0, 9.0, 2.0));
  const BenchReport report = aggregate(records, 42);
  CHECK(report.base_seed == 42);
  REQUIRE(report.cells.size() == 2);
  const CellSummary* c = report.find("fixture", MethodId::variable_multi);
  REQUIRE(c != nullptr);
  CHECK(c->trials == 10);
  CHECK(c->successes == 7);
  CHECK(c->success_pct == doctest::Approx(70.0));
  // Costs sum to 21 over 7 successes; squared deviations sum to 10.5.
  CHECK(*c->cost_mean == doctest::Approx(3.0));
  CHECK(*c->cost_std == doctest::Approx(std::sqrt(10.5 / 6)));
  // Times 0.1..1.0: mean 0.55, squared deviations sum to 0.825.
  CHECK(c->time_mean == doctest::Approx(0.55));
  CHECK(c->time_std == doctest::Approx(std::sqrt(0.825 / 9)));
  CHECK(report.find("fixture", MethodId::rrt_connect) == nullptr);
  CHECK(report.methods() == std::vector<MethodId>{MethodId::variable_multi, MethodId::ours});
}

TEST_CASE("csv emission") {
  const BenchReport report = aggregate({record(MethodId::ours, 0, std::nullopt, 0.25),
                                        record(MethodId::fixed_goal, 0, 1.5, 0.125)}, 0);
  const std::string csv = emit_csv(report);
  std::istringstream in(csv);
  std::string line;
  std::getline(in, line);
  CHECK(line == "scene,method,trials,success_pct,cost_mean,cost_std,time_mean_s,time_std_s");
  std::getline(in, line);
  CHECK(line == "fixture,ours,1,0.00,,,0.250000,0.000000");
  std::getline(in, line);
  CHECK(line == "fixture,fixed_goal,1,100.00,1.500000,0.000000,0.125000,0.000000");
  CHECK(emit(report, ReportFormat::csv) == csv);
  CHECK(parse_report_format("md") == ReportFormat::markdown);
  CHECK_THROWS_AS(parse_report_format("xlsx"), std::invalid_argument);
}

TEST_CASE("markdown round trip recovers the report numbers") {
  std::vector<TrialRecord> records;
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> u(0.0, 3.0);
  for (const std::string scene : {"box_shelf", "cylinder_1"})
    for (const MethodId m : kAllMethods)
      for (std::uint64_t s = 0; s < 5; ++s) {
        const bool ok = m != MethodId::rrt_connect || scene != "box_shelf";
        records.push_back(record(m, s, ok && u(rng) > 1.0 ? std::optional<double>(u(rng)) : std::nullopt,
                                 u(rng), scene));
      }
  const BenchReport report = aggregate(records, 9);
  const std::string md = emit_markdown(report);
  CHECK(md.find("| Fixed Goal |") != std::string::npos);
  CHECK(md.find("*") != std::string::npos);
  const BenchReport back = parse_markdown(md);
  CHECK(back.base_seed == 9);
  REQUIRE(back.cells.size() == report.cells.size());
  for (const auto& c : report.cells) {
    const CellSummary* b = back.find(c.scene, c.method);
    REQUIRE(b != nullptr);
    CHECK(b->trials == c.trials);
    CHECK(std::abs(b->success_pct - c.success_pct) <= 0.005);
    CHECK(b->cost_mean.has_value() == c.cost_mean.has_value());
    if (c.cost_mean) {
      CHECK(std::abs(*b->cost_mean - *c.cost_mean) <= 5e-5);
      CHECK(std::abs(*b->cost_std - *c.cost_std) <= 5e-5);
    }
    CHECK(std::abs(b->time_mean - c.time_mean) <= 5e-5);
    CHECK(std::abs(b->time_std - c.time_std) <= 5e-5);
  }
  CHECK(emit_markdown(back) == md);
}

TEST_CASE("svg drawing is well formed with one element per obstacle") {
  for (const auto& name : shipped_scene_names()) {
    const Scene scene = shipped(name);
    const Trajectory traj = linear_interpolation(scene.start, JointConfig::Zero(5), 6);
    const std::string svg = render_svg(scene.arm, scene, traj, Pose2(0.8, 0.1, -1.0));
    CHECK(well_formed_xml(svg));
    CHECK(count_of(svg, "class=\"obstacle") == static_cast<int>(scene.obstacles.size()));
    CHECK(count_of(svg, "class=\"obstacle target\"") == 1);
    CHECK(count_of(svg, "class=\"pose\"") == 6);
    CHECK(count_of(svg, "class=\"grasp\"") == 1);
  }
  Scene odd = support::open_scene();
  odd.name = "a<b & \"c\"";
  const std::string svg = render_svg(odd.arm, odd, linear_interpolation(odd.start, odd.start, 2));
  CHECK(well_formed_xml(svg));
  CHECK(count_of(svg, "class=\"grasp\"") == 0);

  const fs::path out = scratch("plot.svg");
  plot_trajectory(odd.arm, odd, linear_interpolation(odd.start, odd.start, 2), out);
  CHECK(well_formed_xml(slurp(out)));
  CHECK_THROWS_AS(plot_trajectory(odd.arm, odd, linear_interpolation(odd.start, odd.start, 2),
                                  "/nonexistent_dir/x.svg"),
                  std::runtime_error);
  CHECK_THROWS_AS(write_text("/nonexistent_dir/x.csv", "x"), std::runtime_error);
}

TEST_CASE("command line exit codes and outputs") {
  CHECK(run_cli("scene validate box_table box_shelf cylinder_1 cylinder_2") == 0);
  const fs::path bad = scratch("bad.json");
  std::ofstream(bad) << scene_json(kSlab);
  CHECK(run_cli("scene validate " + bad.string()) == 2);
  CHECK(run_cli("plan --scene nowhere") == 2);
  CHECK(run_cli("plan --scene box_table --method teleport") == 2);
  CHECK(run_cli("bench --trials 0") == 2);

  const fs::path shown = scratch("shown.json");
  REQUIRE(run_cli("scene show cylinder_2", shown) == 0);
  const Scene reparsed = parse_scene(slurp(shown));
  CHECK(reparsed.obstacles == shipped("cylinder_2").obstacles);

  const fs::path traj = scratch("traj.csv");
  const fs::path svg = scratch("plan.svg");
  const int code = run_cli("plan --scene cylinder_2 --method fixed_goal --out-traj " + traj.string() +
                           " --out-svg " + svg.string());
  CHECK(code == (fixed_goal_plan(default_arm(), shipped("cylinder_2"), {}).success ? 0 : 1));
  CHECK(well_formed_xml(slurp(svg)));
  const std::string rows = slurp(traj);
  CHECK(std::count(rows.begin(), rows.end(), '\n') >= 30);

  const fs::path csv = scratch("bench.csv");
  REQUIRE(run_cli("bench --scenes cylinder_2 --methods fixed_goal,variable_single --trials 2 --out " +
                  csv.string()) == 0);
  const std::string text = slurp(csv);
  CHECK(text.rfind("scene,method,trials,success_pct", 0) == 0);
  CHECK(count_of(text, "\ncylinder_2,") == 2);
}
