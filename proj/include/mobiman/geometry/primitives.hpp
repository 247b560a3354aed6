#pragma once

#include "mobiman/geometry/mesh.hpp"

namespace mobiman::geometry {

// Axis-aligned box at `center` with full extents `size`, outward normals.
TriangleMesh make_box(const Eigen::Vector3d& center, const Eigen::Vector3d& size,
                      const std::string& frame = "box");

// Room construction: floor at z = 0, ceiling at z = height, footprint
// x in [-width/2, width/2], y in [-depth/2, depth/2]. Normals face inward.
// wall_offset moves a wall outward (+) or inward (-) along its own axis,
// floor_tilt_rad pivots the floor about the y axis through the room center.
struct RoomSpec {
  double width = 4.0;
  double depth = 4.0;
  double height = 3.0;
  double floor_tilt_rad = 0.0;
  double wall_offset_xp = 0.0;
  double wall_offset_xn = 0.0;
  double wall_offset_yp = 0.0;
  double wall_offset_yn = 0.0;
  bool wall_xp = true;
  bool wall_xn = true;
  bool wall_yp = true;
  bool wall_yn = true;
  bool ceiling = true;
  // Extra yaw of the +y wall about its center (oblique far wall geometries).
  double wall_yp_yaw_rad = 0.0;
};

TriangleMesh make_room(const RoomSpec& spec, const std::string& frame = "room");

// A free-standing rectangular panel: centered at `center`, `yaw` about z,
// width along its local x, height along z, two-sided (thin box).
TriangleMesh make_panel(const Eigen::Vector3d& center, double yaw, double width,
                        double height, double thickness = 0.02,
                        const std::string& frame = "panel");

}  // namespace mobiman::geometry
