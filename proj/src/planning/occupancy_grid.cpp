#include "mobiman/planning/occupancy_grid.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace mobiman::planning {

OccupancyGrid OccupancyGrid::make(const Eigen::Vector3d& origin, double resolution,
                                  int nx, int ny) {
  OccupancyGrid g;
  g.origin = origin;
  g.resolution = resolution;
  g.nx = nx;
  g.ny = ny;
  g.log_odds.assign(static_cast<size_t>(nx) * ny, 0.0);
  g.validate();
  return g;
}

void OccupancyGrid::validate() const {
  if (!(resolution > 0.0)) throw std::runtime_error("grid resolution must be positive");
  if (nx <= 0 || ny <= 0) throw std::runtime_error("grid dimensions must be positive");
  if (log_odds.size() != static_cast<size_t>(nx) * ny)
    throw std::runtime_error("grid cell count does not match dimensions");
  for (double l : log_odds)
    if (!(std::abs(l) <= kLogOddsClamp)) throw std::runtime_error("log-odds out of clamp");
}

OccupancyGrid grid_from_mesh(const geometry::TriangleMesh& mesh, double resolution,
                             double band_low, double band_high, double margin,
                             double sample_density_per_m2, uint64_t sample_seed) {
  if (mesh.empty()) {
    return OccupancyGrid::make(Eigen::Vector3d::Zero(), resolution, 1, 1);
  }
  const geometry::Aabb box = mesh.bounds();
  const Eigen::Vector3d origin(box.min.x() - margin, box.min.y() - margin, 0.0);
  const int nx = std::max(
      1, static_cast<int>(std::ceil((box.max.x() + margin - origin.x()) / resolution)));
  const int ny = std::max(
      1, static_cast<int>(std::ceil((box.max.y() + margin - origin.y()) / resolution)));
  OccupancyGrid grid = OccupancyGrid::make(origin, resolution, nx, ny);

  const geometry::SurfacePointCloud cloud =
      sample_surface(mesh, sample_density_per_m2, sample_seed);
  for (const Eigen::Vector3d& p : cloud.points) {
    if (p.z() < band_low || p.z() > band_high) continue;
    const Eigen::Vector2i c = grid.cell_of(p.x(), p.y());
    if (grid.in_bounds(c.x(), c.y()))
      grid.log_odds[grid.index(c.x(), c.y())] = OccupancyGrid::kLogOddsClamp;
  }
  return grid;
}

namespace {

// Visits every cell the 2D segment [a, b] passes through, in order
// (Amanatides-Woo traversal). Cells outside the raster are skipped.
template <typename Fn>
void walk_cells(const OccupancyGrid& grid, const Eigen::Vector2d& a,
                const Eigen::Vector2d& b, Fn&& fn) {
  const Eigen::Vector2d d = b - a;
  const double len = d.norm();
  Eigen::Vector2i cell = grid.cell_of(a.x(), a.y());
  const Eigen::Vector2i last = grid.cell_of(b.x(), b.y());
  if (len < 1e-12) {
    if (grid.in_bounds(cell.x(), cell.y())) fn(cell.x(), cell.y());
    return;
  }
  const Eigen::Vector2d dir = d / len;
  Eigen::Vector2i step;
  Eigen::Vector2d t_max, t_delta;
  for (int k = 0; k < 2; ++k) {
    if (dir[k] > 1e-15) {
      step[k] = 1;
      const double edge = grid.origin[k] + grid.resolution * (cell[k] + 1);
      t_max[k] = (edge - a[k]) / dir[k];
      t_delta[k] = grid.resolution / dir[k];
    } else if (dir[k] < -1e-15) {
      step[k] = -1;
      const double edge = grid.origin[k] + grid.resolution * cell[k];
      t_max[k] = (edge - a[k]) / dir[k];
      t_delta[k] = -grid.resolution / dir[k];
    } else {
      step[k] = 0;
      t_max[k] = std::numeric_limits<double>::infinity();
      t_delta[k] = std::numeric_limits<double>::infinity();
    }
  }
  const int max_steps =
      std::abs(last.x() - cell.x()) + std::abs(last.y() - cell.y()) + 4;
  for (int guard = 0; guard < max_steps; ++guard) {
    if (grid.in_bounds(cell.x(), cell.y())) fn(cell.x(), cell.y());
    if (cell == last) break;
    if (t_max.x() < t_max.y()) {
      if (t_max.x() > len) break;
      cell.x() += step.x();
      t_max.x() += t_delta.x();
    } else {
      if (t_max.y() > len) break;
      cell.y() += step.y();
      t_max.y() += t_delta.y();
    }
  }
}

}  // namespace

void grid_update(OccupancyGrid& grid, const geometry::SurfacePointCloud& scan,
                 const geometry::Pose& sensor_pose, double band_low, double band_high) {
  const Eigen::Vector3d o = sensor_pose.position;
  for (const Eigen::Vector3d& p_sensor : scan.points) {
    const Eigen::Vector3d e = sensor_pose * p_sensor;

    // Restrict the beam to the parametric window where it is inside the
    // height band; carving outside the band would erase floor-level walls
    // from ceiling-grazing beams and vice versa.
    double t0 = 0.0, t1 = 1.0;
    const double dz = e.z() - o.z();
    if (std::abs(dz) < 1e-12) {
      if (o.z() < band_low || o.z() > band_high) continue;
    } else {
      double ta = (band_low - o.z()) / dz;
      double tb = (band_high - o.z()) / dz;
      if (ta > tb) std::swap(ta, tb);
      t0 = std::max(t0, ta);
      t1 = std::min(t1, tb);
      if (t0 >= t1) continue;
    }

    const Eigen::Vector2d a = (o + t0 * (e - o)).head<2>();
    const Eigen::Vector2d b = (o + t1 * (e - o)).head<2>();
    const bool endpoint_in_band = e.z() >= band_low && e.z() <= band_high;
    const Eigen::Vector2i hit_cell = grid.cell_of(e.x(), e.y());

    walk_cells(grid, a, b, [&](int ix, int iy) {
      if (endpoint_in_band && ix == hit_cell.x() && iy == hit_cell.y()) return;
      grid.add_log_odds(ix, iy, OccupancyGrid::kLogOddsMiss);
    });
    if (endpoint_in_band && grid.in_bounds(hit_cell.x(), hit_cell.y()))
      grid.add_log_odds(hit_cell.x(), hit_cell.y(), OccupancyGrid::kLogOddsHit);
  }
}

}  // namespace mobiman::planning
