#include "mobiman/planning/footprint.hpp"

#include <cmath>
#include <stdexcept>

namespace mobiman::planning {

void RobotFootprint::validate() const {
  if (!(half_length > 0.0) || !(half_width > 0.0))
    throw std::runtime_error("footprint extents must be positive");
  if (inflation < 0.0) throw std::runtime_error("footprint inflation must be >= 0");
}

namespace {

// Separating-axis test between the oriented footprint rectangle and one
// axis-aligned cell square. Four candidate axes: the two world axes and the
// two footprint axes.
bool rect_overlaps_cell(const Eigen::Vector2d& center, double c, double s, double hl,
                        double hw, const Eigen::Vector2d& cell_center, double half_cell) {
  const Eigen::Vector2d d = cell_center - center;
  const Eigen::Vector2d ux(c, s), uy(-s, c);

  // World axes: footprint projects to hl*|axis.ux| + hw*|axis.uy|.
  if (std::abs(d.x()) > hl * std::abs(c) + hw * std::abs(s) + half_cell) return false;
  if (std::abs(d.y()) > hl * std::abs(s) + hw * std::abs(c) + half_cell) return false;
  // Footprint axes: cell projects to half_cell * (|ax.x| + |ax.y|).
  if (std::abs(d.dot(ux)) > hl + half_cell * (std::abs(c) + std::abs(s))) return false;
  if (std::abs(d.dot(uy)) > hw + half_cell * (std::abs(s) + std::abs(c))) return false;
  return true;
}

}  // namespace

bool footprint_hits_occupied(const OccupancyGrid& grid, const RobotFootprint& footprint,
                             double x, double y, double theta) {
  const double hl = footprint.inflated_half_length();
  const double hw = footprint.inflated_half_width();
  const double c = std::cos(theta), s = std::sin(theta);
  const double reach_x = hl * std::abs(c) + hw * std::abs(s);
  const double reach_y = hl * std::abs(s) + hw * std::abs(c);

  const Eigen::Vector2i lo = grid.cell_of(x - reach_x, y - reach_y);
  const Eigen::Vector2i hi = grid.cell_of(x + reach_x, y + reach_y);
  const Eigen::Vector2d center(x, y);
  const double half_cell = 0.5 * grid.resolution;

  for (int iy = std::max(0, lo.y()); iy <= std::min(grid.ny - 1, hi.y()); ++iy) {
    for (int ix = std::max(0, lo.x()); ix <= std::min(grid.nx - 1, hi.x()); ++ix) {
      if (grid.state(ix, iy) != CellState::kOccupied) continue;
      if (rect_overlaps_cell(center, c, s, hl, hw, grid.cell_center(ix, iy), half_cell))
        return true;
    }
  }
  return false;
}

}  // namespace mobiman::planning
