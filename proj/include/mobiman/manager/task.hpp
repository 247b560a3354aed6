#pragma once

#include <string>
#include <vector>

#include "mobiman/geometry/pose.hpp"

namespace mobiman::manager {

// One work location: a commanded tool pose in the model frame (tool +x into
// the work surface), the dot pattern to place around it, and per-sensor
// reference-surface hints that steer scan viewpoint selection.
struct Task {
  std::string id;
  geometry::Pose target;
  // Dot offsets in the target frame; an empty pattern means one dot at the
  // target itself.
  std::vector<Eigen::Vector3d> pattern;
  // Expected reference-plane normal per distance sensor, model frame,
  // pointing back toward the robot. Empty disables the surface check.
  std::vector<Eigen::Vector3d> hint_normals;
  double hint_max_distance = 30.0;

  // Commanded pose of one dot of the pattern.
  geometry::Pose dot_pose(size_t index) const;
  size_t dot_count() const { return pattern.empty() ? 1 : pattern.size(); }

  // Throws std::runtime_error on an empty id, non-unit hint normals, or a
  // nonpositive hint distance.
  void validate() const;
};

// Evenly spaced square grid of side `n` in the target's y/z plane (the work
// surface), centered on the target.
std::vector<Eigen::Vector3d> grid_pattern(int n, double spacing);

// Key/value task file: task.<i>.target.* plus either a named pattern
// ("single" or "grid3x3" with pattern_spacing) or explicit offsets, and
// optional hint normals.
std::vector<Task> load_tasks(const std::string& path);
void save_tasks(const std::string& path, const std::vector<Task>& tasks);

}  // namespace mobiman::manager
