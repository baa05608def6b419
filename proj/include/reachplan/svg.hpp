#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include "reachplan/grasp.hpp"
#include "reachplan/scene.hpp"
#include "reachplan/trajectory.hpp"

namespace reachplan {

/// SVG drawing of the scene with the arm at every waypoint, fading from the
/// start pose to the final one, and the grasp pose marker when given.
std::string render_svg(const Arm& arm, const Scene& scene, const Trajectory& traj,
                       const std::optional<Pose2>& grasp = std::nullopt);

/// Writes render_svg output; throws std::runtime_error on an unwritable path.
void plot_trajectory(const Arm& arm, const Scene& scene, const Trajectory& traj,
                     const std::filesystem::path& path,
                     const std::optional<Pose2>& grasp = std::nullopt);

}  // namespace reachplan
