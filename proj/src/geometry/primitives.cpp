#include "mobiman/geometry/primitives.hpp"

namespace mobiman::geometry {

namespace {

void add_quad(std::vector<Eigen::Vector3d>& verts, std::vector<Eigen::Vector3i>& tris,
              const Eigen::Vector3d& a, const Eigen::Vector3d& b,
              const Eigen::Vector3d& c, const Eigen::Vector3d& d) {
  const int i = static_cast<int>(verts.size());
  verts.push_back(a);
  verts.push_back(b);
  verts.push_back(c);
  verts.push_back(d);
  tris.push_back(Eigen::Vector3i(i, i + 1, i + 2));
  tris.push_back(Eigen::Vector3i(i, i + 2, i + 3));
}

}  // namespace

TriangleMesh make_box(const Eigen::Vector3d& center, const Eigen::Vector3d& size,
                      const std::string& frame) {
  const Eigen::Vector3d h = 0.5 * size;
  const double x0 = center.x() - h.x(), x1 = center.x() + h.x();
  const double y0 = center.y() - h.y(), y1 = center.y() + h.y();
  const double z0 = center.z() - h.z(), z1 = center.z() + h.z();
  std::vector<Eigen::Vector3d> v;
  std::vector<Eigen::Vector3i> t;
  using V = Eigen::Vector3d;
  add_quad(v, t, V(x1, y0, z0), V(x1, y1, z0), V(x1, y1, z1), V(x1, y0, z1));  // +x
  add_quad(v, t, V(x0, y1, z0), V(x0, y0, z0), V(x0, y0, z1), V(x0, y1, z1));  // -x
  add_quad(v, t, V(x1, y1, z0), V(x0, y1, z0), V(x0, y1, z1), V(x1, y1, z1));  // +y
  add_quad(v, t, V(x0, y0, z0), V(x1, y0, z0), V(x1, y0, z1), V(x0, y0, z1));  // -y
  add_quad(v, t, V(x0, y0, z1), V(x1, y0, z1), V(x1, y1, z1), V(x0, y1, z1));  // +z
  add_quad(v, t, V(x0, y1, z0), V(x1, y1, z0), V(x1, y0, z0), V(x0, y0, z0));  // -z
  return TriangleMesh::from_triangles(std::move(v), std::move(t), frame);
}

TriangleMesh make_room(const RoomSpec& s, const std::string& frame) {
  using V = Eigen::Vector3d;
  const double hx = 0.5 * s.width;
  const double hy = 0.5 * s.depth;
  const double tan_tilt = std::tan(s.floor_tilt_rad);
  const auto floor_z = [&](double x) { return x * tan_tilt; };
  // Walls reach below the lowest floor corner so tilted floors leave no gap.
  const double zb = std::min(0.0, -hx * std::abs(tan_tilt)) - 0.2;
  const double zt = s.height;

  std::vector<Eigen::Vector3d> v;
  std::vector<Eigen::Vector3i> t;

  add_quad(v, t, V(-hx, -hy, floor_z(-hx)), V(hx, -hy, floor_z(hx)),
           V(hx, hy, floor_z(hx)), V(-hx, hy, floor_z(-hx)));  // floor, +z inward
  if (s.ceiling)
    add_quad(v, t, V(-hx, -hy, zt), V(-hx, hy, zt), V(hx, hy, zt), V(hx, -hy, zt));

  if (s.wall_xp) {
    const double x = hx + s.wall_offset_xp;
    add_quad(v, t, V(x, hy, zb), V(x, -hy, zb), V(x, -hy, zt), V(x, hy, zt));
  }
  if (s.wall_xn) {
    const double x = -hx - s.wall_offset_xn;
    add_quad(v, t, V(x, -hy, zb), V(x, hy, zb), V(x, hy, zt), V(x, -hy, zt));
  }
  if (s.wall_yp) {
    const double y = hy + s.wall_offset_yp;
    // Optionally yawed about its own center; extended so it still spans the room.
    const double ext = std::abs(std::tan(s.wall_yp_yaw_rad)) * hy + 0.5;
    const V center(0.0, y, 0.5 * (zb + zt));
    const Eigen::Quaterniond yaw(Eigen::AngleAxisd(s.wall_yp_yaw_rad, V::UnitZ()));
    const auto wp = [&](double x, double z) -> V {
      return center + yaw * (V(x, 0.0, z) - V(0.0, 0.0, center.z()));
    };
    add_quad(v, t, wp(-hx - ext, zb), wp(hx + ext, zb), wp(hx + ext, zt),
             wp(-hx - ext, zt));
  }
  if (s.wall_yn) {
    const double y = -hy - s.wall_offset_yn;
    add_quad(v, t, V(hx, y, zb), V(-hx, y, zb), V(-hx, y, zt), V(hx, y, zt));
  }
  return TriangleMesh::from_triangles(std::move(v), std::move(t), frame);
}

TriangleMesh make_panel(const Eigen::Vector3d& center, double yaw, double width,
                        double height, double thickness, const std::string& frame) {
  const TriangleMesh box = make_box(Eigen::Vector3d::Zero(),
                                    Eigen::Vector3d(width, thickness, height), frame);
  const Pose pose(center,
                  Eigen::Quaterniond(Eigen::AngleAxisd(yaw, Eigen::Vector3d::UnitZ())));
  return box.transformed(pose);
}

}  // namespace mobiman::geometry
