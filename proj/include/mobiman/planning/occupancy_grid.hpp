#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <vector>

#include "mobiman/geometry/mesh.hpp"
#include "mobiman/geometry/pose.hpp"

namespace mobiman::planning {

enum class CellState { kFree, kUnknown, kOccupied };

// Planar log-odds occupancy raster. Cell (ix, iy) spans
// [origin + res*(ix, iy), origin + res*(ix+1, iy+1)) in world x/y; origin.z
// records the plane the raster lives on. Log-odds 0 is unknown; values are
// clamped so a cell can always be argued back out of either state.
struct OccupancyGrid {
  static constexpr double kLogOddsHit = 0.85;
  static constexpr double kLogOddsMiss = -0.4;
  static constexpr double kLogOddsClamp = 3.5;
  static constexpr double kOccupiedThreshold = 0.5;
  static constexpr double kFreeThreshold = -0.5;

  Eigen::Vector3d origin = Eigen::Vector3d::Zero();
  double resolution = 0.1;
  int nx = 0;
  int ny = 0;
  std::vector<double> log_odds;  // row-major, iy * nx + ix

  static OccupancyGrid make(const Eigen::Vector3d& origin, double resolution, int nx,
                            int ny);

  bool in_bounds(int ix, int iy) const { return ix >= 0 && ix < nx && iy >= 0 && iy < ny; }
  int index(int ix, int iy) const { return iy * nx + ix; }

  Eigen::Vector2i cell_of(double x, double y) const {
    return Eigen::Vector2i(static_cast<int>(std::floor((x - origin.x()) / resolution)),
                           static_cast<int>(std::floor((y - origin.y()) / resolution)));
  }
  Eigen::Vector2d cell_center(int ix, int iy) const {
    return Eigen::Vector2d(origin.x() + resolution * (ix + 0.5),
                           origin.y() + resolution * (iy + 0.5));
  }

  CellState state(int ix, int iy) const {
    const double l = log_odds[index(ix, iy)];
    if (l > kOccupiedThreshold) return CellState::kOccupied;
    if (l < kFreeThreshold) return CellState::kFree;
    return CellState::kUnknown;
  }

  void add_log_odds(int ix, int iy, double delta) {
    double& l = log_odds[index(ix, iy)];
    l = std::clamp(l + delta, -kLogOddsClamp, kLogOddsClamp);
  }

  double min_x() const { return origin.x(); }
  double min_y() const { return origin.y(); }
  double max_x() const { return origin.x() + resolution * nx; }
  double max_y() const { return origin.y() + resolution * ny; }

  // Throws std::runtime_error on nonpositive resolution/dims or size mismatch.
  void validate() const;
};

// Obstacle-relevant height band: geometry below (floor) or above (ceiling,
// fixtures the arm never reaches) is ignored when rasterizing.
inline constexpr double kDefaultBandLow = 0.1;
inline constexpr double kDefaultBandHigh = 1.8;

// Seeds a grid from the building model: surface-sampled points inside the
// height band mark their cell occupied, everything else stays unknown. The
// raster covers the mesh footprint plus `margin` on each side. An empty mesh
// yields a single unknown cell.
OccupancyGrid grid_from_mesh(const geometry::TriangleMesh& mesh, double resolution,
                             double band_low = kDefaultBandLow,
                             double band_high = kDefaultBandHigh, double margin = 0.5,
                             double sample_density_per_m2 = 800.0,
                             uint64_t sample_seed = 0x6e5eedULL);

// Folds one scan into the grid: each beam carves free space along its 2D
// projection (restricted to the height band) and, if the endpoint lies inside
// the band, bumps the endpoint cell toward occupied. Beams leaving the raster
// are clipped silently.
void grid_update(OccupancyGrid& grid, const geometry::SurfacePointCloud& scan,
                 const geometry::Pose& sensor_pose, double band_low = kDefaultBandLow,
                 double band_high = kDefaultBandHigh);

}  // namespace mobiman::planning
