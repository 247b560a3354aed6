#include "mobiman/planning/grid_io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace mobiman::planning {

namespace {
constexpr const char* kMagic = "mobiman_grid 1";
}

void save_grid(const std::string& path, const OccupancyGrid& grid) {
  grid.validate();
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open grid file for writing: " + path);
  char buf[256];
  std::snprintf(buf, sizeof(buf), "%s\norigin %.17g %.17g %.17g\nresolution %.17g\ndims %d %d\ndata float64\n",
                kMagic, grid.origin.x(), grid.origin.y(), grid.origin.z(),
                grid.resolution, grid.nx, grid.ny);
  out << buf;
  out.write(reinterpret_cast<const char*>(grid.log_odds.data()),
            static_cast<std::streamsize>(grid.log_odds.size() * sizeof(double)));
  if (!out) throw std::runtime_error("grid write failed: " + path);
}

OccupancyGrid load_grid(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open grid file: " + path);
  std::string line;
  auto next_line = [&](const char* what) {
    if (!std::getline(in, line))
      throw std::runtime_error(std::string("grid header truncated, expected ") + what);
    return line;
  };
  if (next_line("magic") != kMagic) throw std::runtime_error("not a grid file: " + path);

  OccupancyGrid grid;
  {
    std::istringstream s(next_line("origin"));
    std::string key;
    if (!(s >> key >> grid.origin.x() >> grid.origin.y() >> grid.origin.z()) ||
        key != "origin")
      throw std::runtime_error("bad grid origin line");
  }
  {
    std::istringstream s(next_line("resolution"));
    std::string key;
    if (!(s >> key >> grid.resolution) || key != "resolution")
      throw std::runtime_error("bad grid resolution line");
  }
  {
    std::istringstream s(next_line("dims"));
    std::string key;
    if (!(s >> key >> grid.nx >> grid.ny) || key != "dims")
      throw std::runtime_error("bad grid dims line");
  }
  if (next_line("data") != "data float64")
    throw std::runtime_error("unsupported grid data encoding");

  if (grid.nx <= 0 || grid.ny <= 0) throw std::runtime_error("bad grid dims");
  grid.log_odds.resize(static_cast<size_t>(grid.nx) * grid.ny);
  in.read(reinterpret_cast<char*>(grid.log_odds.data()),
          static_cast<std::streamsize>(grid.log_odds.size() * sizeof(double)));
  if (in.gcount() !=
      static_cast<std::streamsize>(grid.log_odds.size() * sizeof(double)))
    throw std::runtime_error("grid data block truncated: " + path);
  grid.validate();
  return grid;
}

}  // namespace mobiman::planning
