#pragma once

#include <string>

#include "mobiman/planning/occupancy_grid.hpp"

namespace mobiman::planning {

// Portable raster dump: a text header (magic, origin, resolution, dims)
// followed by the raw row-major float64 log-odds block, little-endian. A
// dump/load round-trip reproduces the grid bit-exactly on the same
// endianness, which the replay tooling depends on.
void save_grid(const std::string& path, const OccupancyGrid& grid);
OccupancyGrid load_grid(const std::string& path);

}  // namespace mobiman::planning
