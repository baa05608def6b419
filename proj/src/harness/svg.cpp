#include "reachplan/svg.hpp"

#include <cstdio>
#include <sstream>

#include "reachplan/report.hpp"

namespace reachplan {

namespace {

constexpr double kPixelsPerMeter = 300.0;

class Canvas {
 public:
  explicit Canvas(const Workspace& bounds) : bounds_(bounds) {}

  double x(double wx) const { return (wx - bounds_.lower.x()) * kPixelsPerMeter; }
  double y(double wy) const { return (bounds_.upper.y() - wy) * kPixelsPerMeter; }
  double width() const { return (bounds_.upper.x() - bounds_.lower.x()) * kPixelsPerMeter; }
  double height() const { return (bounds_.upper.y() - bounds_.lower.y()) * kPixelsPerMeter; }

 private:
  Workspace bounds_;
};

std::string escape(const std::string& text) {
  std::string out;
  for (const char ch : text) {
    switch (ch) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += ch;
    }
  }
  return out;
}

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

}  // namespace

std::string render_svg(const Arm& arm, const Scene& scene, const Trajectory& traj,
                       const std::optional<Pose2>& grasp) {
  const Canvas c(scene.bounds);
  std::ostringstream out;
  out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
      << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << num(c.width())
      << "\" height=\"" << num(c.height()) << "\" viewBox=\"0 0 " << num(c.width()) << ' '
      << num(c.height()) << "\">\n"
      << "  <title>" << escape(scene.name) << "</title>\n"
      << "  <rect class=\"background\" x=\"0\" y=\"0\" width=\"" << num(c.width())
      << "\" height=\"" << num(c.height()) << "\" fill=\"#ffffff\"/>\n";

  out << "  <g id=\"obstacles\">\n";
  for (const auto& o : scene.obstacles) {
    const char* cls = o.is_target ? "obstacle target" : "obstacle";
    const char* fill = o.is_target ? "#e4572e" : "#8a8f98";
    if (o.kind == ObstacleKind::rect) {
      out << "    <rect class=\"" << cls << "\" x=\"" << num(c.x(o.center.x() - o.half_extents.x()))
          << "\" y=\"" << num(c.y(o.center.y() + o.half_extents.y())) << "\" width=\""
          << num(2 * o.half_extents.x() * kPixelsPerMeter) << "\" height=\""
          << num(2 * o.half_extents.y() * kPixelsPerMeter) << "\" fill=\"" << fill << "\"/>\n";
    } else {
      out << "    <circle class=\"" << cls << "\" cx=\"" << num(c.x(o.center.x())) << "\" cy=\""
          << num(c.y(o.center.y())) << "\" r=\"" << num(o.radius * kPixelsPerMeter)
          << "\" fill=\"" << fill << "\"/>\n";
    }
  }
  out << "  </g>\n";

  out << "  <g id=\"arm\" fill=\"none\" stroke=\"#1f4e79\" stroke-linecap=\"round\" "
         "stroke-linejoin=\"round\" stroke-width=\""
      << num(2 * arm.link_radius * kPixelsPerMeter) << "\">\n";
  const Eigen::Index n = traj.size();
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto frames = forward_kinematics(arm, JointConfig(traj.waypoint(i)));
    const double opacity = n == 1 ? 1.0 : 0.15 + 0.85 * static_cast<double>(i) / (n - 1);
    out << "    <polyline class=\"pose\" stroke-opacity=\"" << num(opacity) << "\" points=\"";
    for (std::size_t k = 0; k < frames.points.size(); ++k)
      out << (k ? " " : "") << num(c.x(frames.points[k].x())) << ','
          << num(c.y(frames.points[k].y()));
    out << "\"/>\n";
  }
  out << "  </g>\n";

  if (grasp) {
    // Flange dot plus a short stroke along the approach direction.
    const Point2 tip = grasp->position + arm.gripper_standoff *
                                             Point2(std::cos(grasp->phi), std::sin(grasp->phi));
    out << "  <g class=\"grasp\" stroke=\"#2a9d8f\" fill=\"#2a9d8f\">\n"
        << "    <line x1=\"" << num(c.x(grasp->x())) << "\" y1=\"" << num(c.y(grasp->y()))
        << "\" x2=\"" << num(c.x(tip.x())) << "\" y2=\"" << num(c.y(tip.y()))
        << "\" stroke-width=\"3\"/>\n"
        << "    <circle cx=\"" << num(c.x(grasp->x())) << "\" cy=\"" << num(c.y(grasp->y()))
        << "\" r=\"4\"/>\n"
        << "  </g>\n";
  }
  out << "</svg>\n";
  return out.str();
}

void plot_trajectory(const Arm& arm, const Scene& scene, const Trajectory& traj,
                     const std::filesystem::path& path, const std::optional<Pose2>& grasp) {
  write_text(path, render_svg(arm, scene, traj, grasp));
}

}  // namespace reachplan
