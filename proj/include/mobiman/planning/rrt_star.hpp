#pragma once

#include <optional>
#include <string>
#include <vector>

#include "mobiman/planning/footprint.hpp"
#include "mobiman/planning/occupancy_grid.hpp"

namespace mobiman::planning {

struct PlanarPose {
  double x = 0.0;
  double y = 0.0;
  double theta = 0.0;
};

// Timed planar waypoint sequence for the base. Headings follow the path
// tangent except the last waypoint, which carries the goal heading.
struct BaseTrajectory {
  struct Waypoint {
    double t = 0.0;
    double x = 0.0;
    double y = 0.0;
    double theta = 0.0;
  };
  std::vector<Waypoint> waypoints;
  double total_cost = 0.0;  // path length, meters

  bool empty() const { return waypoints.empty(); }
  size_t size() const { return waypoints.size(); }

  // Throws std::runtime_error on non-increasing timestamps or waypoint
  // spacing above max_spacing.
  void validate(double max_spacing) const;
};

struct RrtConfig {
  int max_iterations = 2000;
  double steer_step = 0.3;
  double goal_bias = 0.1;
  double goal_tolerance = 0.2;
  double nominal_speed = 0.5;             // assigns waypoint timestamps
  double collision_check_spacing = 0.05;  // pose samples along tree edges
  double time_budget_sec = 0.0;           // 0 disables the wall-clock cutoff

  // Throws std::runtime_error on out-of-range values.
  void validate() const;
};

struct PlanResult {
  BaseTrajectory trajectory;
  bool ok = false;
  std::string diagnostic;
  int iterations_used = 0;
};

// Samples a collision-free planar path from start to goal, treating unknown
// cells as free. Deterministic for a given (grid, config, seed). Fails with a
// diagnostic when the start or goal is in collision or no path is found
// within the budget.
PlanResult rrt_star_plan(const OccupancyGrid& grid, const RobotFootprint& footprint,
                         const PlanarPose& start, const PlanarPose& goal,
                         const RrtConfig& config, uint64_t seed);

// Index of the first waypoint whose inflated footprint overlaps an occupied
// cell, or nullopt when the whole trajectory is clear.
std::optional<size_t> check_trajectory(const OccupancyGrid& grid,
                                       const RobotFootprint& footprint,
                                       const BaseTrajectory& trajectory);

// Replaces a trajectory that check_trajectory flagged: plans fresh from the
// current pose against the latest grid. A collision index at or beyond the
// trajectory end is vacuous and returns the input unchanged.
PlanResult replan_on_collision(const OccupancyGrid& grid, const RobotFootprint& footprint,
                               const BaseTrajectory& current, size_t collision_index,
                               const PlanarPose& current_pose, const PlanarPose& goal,
                               const RrtConfig& config, uint64_t seed);

// CSV export/import with header "t,x,y,theta"; doubles carry full precision
// so a round-trip reproduces the trajectory bit-exactly.
void save_trajectory_csv(const std::string& path, const BaseTrajectory& trajectory);
BaseTrajectory load_trajectory_csv(const std::string& path);

}  // namespace mobiman::planning
