#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "reachplan/scene.hpp"

namespace reachplan {

/// Malformed or invalid scene description. `where` names the offending JSON
/// field (e.g. "obstacles[2].radius") or "line L, column C" for syntax errors.
class SceneError : public std::runtime_error {
 public:
  SceneError(std::string where, std::string detail)
      : std::runtime_error(where.empty() ? detail : where + ": " + detail),
        where_(std::move(where)),
        detail_(std::move(detail)) {}
  const std::string& where() const { return where_; }
  const std::string& detail() const { return detail_; }

 private:
  std::string where_;
  std::string detail_;
};

/// Parses and validates a scene document.
Scene parse_scene(std::string_view text);
Scene load_scene(const std::filesystem::path& path);

/// Serializes a scene; parse_scene(emit_scene(s)) reproduces s.
std::string emit_scene(const Scene& scene);

/// Throws SceneError naming the first violated invariant.
void validate_scene(const Scene& scene);

/// Shipped scene names, in report order.
const std::vector<std::string>& shipped_scene_names();

/// Resolves a scene argument: an existing file path, or a shipped scene name
/// looked up in `scene_dir`.
std::filesystem::path resolve_scene(std::string_view name_or_path,
                                    const std::filesystem::path& scene_dir);

}  // namespace reachplan
