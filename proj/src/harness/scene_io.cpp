#include "reachplan/scene_io.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "reachplan/clearance.hpp"

namespace reachplan {

namespace {

using nlohmann::json;

/// Cursor over a JSON node that remembers its path for diagnostics.
class Field {
 public:
  Field(const json& node, std::string path) : node_(node), path_(std::move(path)) {}

  const std::string& path() const { return path_; }
  const json& node() const { return node_; }

  bool has(const char* key) const { return node_.is_object() && node_.contains(key); }

  Field at(const char* key) const {
    if (!node_.is_object()) fail("expected an object");
    const auto it = node_.find(key);
    if (it == node_.end()) throw SceneError(join(key), "missing required field");
    return {*it, join(key)};
  }

  Field at(std::size_t i) const { return {node_.at(i), path_ + "[" + std::to_string(i) + "]"}; }

  std::size_t array_size() const {
    if (!node_.is_array()) fail("expected an array");
    return node_.size();
  }

  double number() const {
    if (!node_.is_number()) fail("expected a number");
    return node_.get<double>();
  }

  long integer() const {
    if (!node_.is_number_integer()) fail("expected an integer");
    return node_.get<long>();
  }

  bool boolean() const {
    if (!node_.is_boolean()) fail("expected true or false");
    return node_.get<bool>();
  }

  std::string string() const {
    if (!node_.is_string()) fail("expected a string");
    return node_.get<std::string>();
  }

  Eigen::VectorXd vector(Eigen::Index expected = -1) const {
    const std::size_t n = array_size();
    if (expected >= 0 && static_cast<Eigen::Index>(n) != expected)
      fail("expected " + std::to_string(expected) + " numbers, got " + std::to_string(n));
    Eigen::VectorXd out(static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i) out[static_cast<Eigen::Index>(i)] = at(i).number();
    return out;
  }

  Point2 point() const { return vector(2); }

  [[noreturn]] void fail(const std::string& what) const { throw SceneError(path_, what); }

 private:
  std::string join(const char* key) const { return path_.empty() ? key : path_ + "." + key; }

  const json& node_;
  std::string path_;
};

Eigen::VectorXd radians(const Eigen::VectorXd& deg) { return deg * (std::numbers::pi / 180.0); }
Eigen::VectorXd degrees(const Eigen::VectorXd& rad) { return rad * (180.0 / std::numbers::pi); }

json to_json(const Eigen::VectorXd& v) { return json(std::vector<double>(v.begin(), v.end())); }

Arm parse_arm(const Field& f) {
  Arm arm = default_arm();
  if (f.has("link_lengths")) arm.link_lengths = f.at("link_lengths").vector();
  const Eigen::Index dof = arm.dof();
  if (f.has("joint_lower_deg")) arm.joint_lower = radians(f.at("joint_lower_deg").vector(dof));
  if (f.has("joint_upper_deg")) arm.joint_upper = radians(f.at("joint_upper_deg").vector(dof));
  if (f.has("base")) {
    const Field base = f.at("base");
    arm.base = Pose2(base.at("position").point(), deg_to_rad(base.at("phi_deg").number()));
  }
  if (f.has("gripper_standoff")) arm.gripper_standoff = f.at("gripper_standoff").number();
  if (f.has("link_radius")) arm.link_radius = f.at("link_radius").number();
  try {
    arm.validate();
  } catch (const std::invalid_argument& e) {
    f.fail(e.what());
  }
  return arm;
}

Obstacle<double> parse_obstacle(const Field& f) {
  const std::string kind = f.at("kind").string();
  const bool target = f.has("is_target") && f.at("is_target").boolean();
  if (kind == "rect")
    return Obstacle<double>::rect(f.at("center").point(), f.at("half_extents").point(), target);
  if (kind == "disc")
    return Obstacle<double>::disc(f.at("center").point(), f.at("radius").number(), target);
  f.at("kind").fail("unknown obstacle kind '" + kind + "' (expected rect or disc)");
}

GraspParams parse_fixed_grasp(const Field& f, double default_standoff) {
  GraspParams g;
  g.standoff = f.has("standoff") ? f.at("standoff").number() : default_standoff;
  if (f.has("alpha_deg")) {
    g.alpha = deg_to_rad(f.at("alpha_deg").number());
    return g;
  }
  const Field side = f.at("side");
  try {
    g.side = parse_grasp_side(side.string());
  } catch (const std::invalid_argument& e) {
    side.fail(e.what());
  }
  g.theta = f.has("theta_deg") ? deg_to_rad(f.at("theta_deg").number()) : std::numbers::pi / 2;
  g.s = f.has("s") ? f.at("s").number() : 0.0;
  return g;
}

Scene parse_document(const json& doc) {
  const Field root(doc, "");
  if (!doc.is_object()) root.fail("scene document must be a JSON object");
  Scene scene;
  scene.name = root.at("name").string();
  if (root.has("arm")) scene.arm = parse_arm(root.at("arm"));

  const Field obstacles = root.at("obstacles");
  for (std::size_t i = 0; i < obstacles.array_size(); ++i)
    scene.obstacles.push_back(parse_obstacle(obstacles.at(i)));
  if (root.has("target")) {
    const Field target = root.at("target");
    const long id = target.integer();
    if (id < 0 || id >= static_cast<long>(scene.obstacles.size()))
      target.fail("target index " + std::to_string(id) + " is out of range");
    scene.obstacles[static_cast<std::size_t>(id)].is_target = true;
  }
  const auto flagged = std::find_if(scene.obstacles.begin(), scene.obstacles.end(),
                                    [](const auto& o) { return o.is_target; });
  if (flagged != scene.obstacles.end())
    scene.target_id = static_cast<int>(flagged - scene.obstacles.begin());

  scene.start = radians(root.at("start_deg").vector());

  if (root.has("grasp")) {
    const Field g = root.at("grasp");
    if (g.has("standoff")) scene.grasp.standoff = g.at("standoff").number();
    if (g.has("overlap_ratio")) scene.grasp.overlap_ratio = g.at("overlap_ratio").number();
    if (g.has("finger_width")) scene.grasp.finger_width = g.at("finger_width").number();
  }
  if (root.has("fixed_grasp"))
    scene.fixed_grasp = parse_fixed_grasp(root.at("fixed_grasp"), scene.grasp.standoff);
  if (root.has("workspace")) {
    const Field w = root.at("workspace");
    scene.bounds.lower = w.at("lower").point();
    scene.bounds.upper = w.at("upper").point();
  }
  return scene;
}

std::string line_column(std::string_view text, std::size_t byte) {
  byte = std::min(byte, text.size());
  std::size_t line = 1;
  std::size_t column = 1;
  for (std::size_t i = 0; i + 1 < byte; ++i) {
    if (text[i] == '\n') {
      ++line;
      column = 1;
    } else {
      ++column;
    }
  }
  return "line " + std::to_string(line) + ", column " + std::to_string(column);
}

}  // namespace

void validate_scene(const Scene& scene) {
  try {
    scene.arm.validate();
  } catch (const std::invalid_argument& e) {
    throw SceneError("arm", e.what());
  }
  if (scene.obstacles.empty()) throw SceneError("obstacles", "scene has no obstacles");
  int targets = 0;
  for (std::size_t i = 0; i < scene.obstacles.size(); ++i) {
    const auto& o = scene.obstacles[i];
    const std::string where = "obstacles[" + std::to_string(i) + "]";
    if (o.kind == ObstacleKind::rect && !(o.half_extents.minCoeff() > 0.0))
      throw SceneError(where, "zero-thickness rectangle (half extents must be positive)");
    if (o.kind == ObstacleKind::disc && !(o.radius > 0.0))
      throw SceneError(where, "zero-thickness disc (radius must be positive)");
    targets += o.is_target ? 1 : 0;
  }
  if (targets != 1)
    throw SceneError("target", "scene must flag exactly one target, found " +
                                   std::to_string(targets));
  if (scene.target_id < 0 || scene.target_id >= static_cast<int>(scene.obstacles.size()) ||
      !scene.target().is_target)
    throw SceneError("target", "target index does not point at the flagged obstacle");

  if (scene.start.size() != scene.arm.dof())
    throw SceneError("start_deg", "expected " + std::to_string(scene.arm.dof()) +
                                      " joint angles, got " + std::to_string(scene.start.size()));
  if (!scene.arm.within_limits(scene.start))
    throw SceneError("start_deg", "start configuration violates joint limits");
  const auto clearance = config_clearance(scene.arm, scene.start, scene, true);
  if (!(clearance.min_distance > 0.0))
    throw SceneError("start_deg", "start configuration collides with obstacle " +
                                      std::to_string(clearance.obstacle) + " (link " +
                                      std::to_string(clearance.link) + ")");

  const auto& g = scene.grasp;
  if (!(g.standoff >= 0.0)) throw SceneError("grasp.standoff", "must be non-negative");
  if (!(g.overlap_ratio > 0.0 && g.overlap_ratio <= 1.0))
    throw SceneError("grasp.overlap_ratio", "must lie in (0, 1]");
  if (!(g.finger_width > 0.0)) throw SceneError("grasp.finger_width", "must be positive");

  if (scene.fixed_grasp) {
    const auto& fg = *scene.fixed_grasp;
    if (scene.target().kind == ObstacleKind::rect) {
      if (!(fg.theta >= 0.0 && fg.theta <= std::numbers::pi / 2))
        throw SceneError("fixed_grasp.theta_deg", "must lie in [0, 90]");
      const auto [lo, hi] = s_bounds(fg.theta, scene.target(), g.overlap_ratio);
      if (fg.s < lo || fg.s > hi)
        throw SceneError("fixed_grasp.s", "slide lies outside the overlap bounds [" +
                                              std::to_string(lo) + ", " + std::to_string(hi) +
                                              "]");
    }
    if (!(fg.standoff >= 0.0)) throw SceneError("fixed_grasp.standoff", "must be non-negative");
  }
  if (!(scene.bounds.lower.array() < scene.bounds.upper.array()).all())
    throw SceneError("workspace", "lower corner must lie below and left of upper corner");
}

Scene parse_scene(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    throw SceneError(line_column(text, e.byte), "JSON syntax error");
  }
  Scene scene;
  try {
    scene = parse_document(doc);
  } catch (const json::exception& e) {
    throw SceneError("", e.what());
  }
  validate_scene(scene);
  return scene;
}

Scene load_scene(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw SceneError(path.string(), "cannot open scene file");
  std::stringstream buffer;
  buffer << in.rdbuf();
  try {
    return parse_scene(buffer.str());
  } catch (const SceneError& e) {
    throw SceneError(e.where().empty() ? path.string() : path.string() + ": " + e.where(),
                     e.detail());
  }
}

std::string emit_scene(const Scene& scene) {
  const Arm& arm = scene.arm;
  json doc;
  doc["name"] = scene.name;
  doc["arm"] = {
      {"link_lengths", to_json(arm.link_lengths)},
      {"joint_lower_deg", to_json(degrees(arm.joint_lower))},
      {"joint_upper_deg", to_json(degrees(arm.joint_upper))},
      {"base",
       {{"position", to_json(arm.base.position)}, {"phi_deg", rad_to_deg(arm.base.phi)}}},
      {"gripper_standoff", arm.gripper_standoff},
      {"link_radius", arm.link_radius},
  };
  json obstacles = json::array();
  for (const auto& o : scene.obstacles) {
    json entry;
    if (o.kind == ObstacleKind::rect) {
      entry = {{"kind", "rect"},
               {"center", to_json(o.center)},
               {"half_extents", to_json(o.half_extents)}};
    } else {
      entry = {{"kind", "disc"}, {"center", to_json(o.center)}, {"radius", o.radius}};
    }
    obstacles.push_back(entry);
  }
  doc["obstacles"] = obstacles;
  doc["target"] = scene.target_id;
  doc["start_deg"] = to_json(degrees(scene.start));
  if (scene.fixed_grasp) {
    const auto& g = *scene.fixed_grasp;
    if (scene.target_id >= 0 && scene.target().kind == ObstacleKind::disc) {
      doc["fixed_grasp"] = {{"alpha_deg", rad_to_deg(g.alpha)}, {"standoff", g.standoff}};
    } else {
      doc["fixed_grasp"] = {{"side", std::string(to_string(g.side))},
                            {"theta_deg", rad_to_deg(g.theta)},
                            {"s", g.s},
                            {"standoff", g.standoff}};
    }
  }
  doc["grasp"] = {{"standoff", scene.grasp.standoff},
                  {"overlap_ratio", scene.grasp.overlap_ratio},
                  {"finger_width", scene.grasp.finger_width}};
  doc["workspace"] = {{"lower", to_json(scene.bounds.lower)},
                      {"upper", to_json(scene.bounds.upper)}};
  return doc.dump(2) + "\n";
}

const std::vector<std::string>& shipped_scene_names() {
  static const std::vector<std::string> names{"box_shelf", "box_table", "cylinder_1",
                                              "cylinder_2"};
  return names;
}

std::filesystem::path resolve_scene(std::string_view name_or_path,
                                    const std::filesystem::path& scene_dir) {
  const std::filesystem::path direct(name_or_path);
  if (std::filesystem::is_regular_file(direct)) return direct;
  auto shipped = scene_dir / (std::string(name_or_path) + ".json");
  if (std::filesystem::is_regular_file(shipped)) return shipped;
  throw SceneError(std::string(name_or_path), "no such scene file or shipped scene");
}

}  // namespace reachplan
