#pragma once

#include <Eigen/Core>

#include "mobiman/planning/occupancy_grid.hpp"

namespace mobiman::planning {

// Rectangular base bounding box, axis-aligned in the base frame (x forward).
// The inflation margin absorbs grid discretization and tracking error.
struct RobotFootprint {
  double half_length = 0.4;
  double half_width = 0.3;
  double inflation = 0.05;

  double inflated_half_length() const { return half_length + inflation; }
  double inflated_half_width() const { return half_width + inflation; }

  // Throws std::runtime_error if extents are not positive or inflation < 0.
  void validate() const;
};

// True when the inflated footprint rectangle at (x, y, theta) overlaps any
// occupied cell. Unknown and free cells never collide (optimistic planning).
bool footprint_hits_occupied(const OccupancyGrid& grid, const RobotFootprint& footprint,
                             double x, double y, double theta);

}  // namespace mobiman::planning
