#pragma once

#include <Eigen/Core>
#include <string>
#include <vector>

#include "mobiman/geometry/pose.hpp"

namespace mobiman::geometry {

struct Aabb {
  Eigen::Vector3d min = Eigen::Vector3d::Constant(std::numeric_limits<double>::max());
  Eigen::Vector3d max = Eigen::Vector3d::Constant(std::numeric_limits<double>::lowest());

  void expand(const Eigen::Vector3d& p) {
    min = min.cwiseMin(p);
    max = max.cwiseMax(p);
  }
  bool contains(const Eigen::Vector3d& p) const {
    return (p.array() >= min.array()).all() && (p.array() <= max.array()).all();
  }
};

// Static triangle mesh with per-triangle unit normals. Degenerate triangles
// (area <= 1e-12 m^2) are rejected at construction.
struct TriangleMesh {
  std::vector<Eigen::Vector3d> vertices;
  std::vector<Eigen::Vector3i> triangles;
  std::vector<Eigen::Vector3d> normals;
  std::string frame = "mesh";

  static TriangleMesh from_triangles(std::vector<Eigen::Vector3d> vertices,
                                     std::vector<Eigen::Vector3i> triangles,
                                     const std::string& frame = "mesh");

  size_t triangle_count() const { return triangles.size(); }
  bool empty() const { return triangles.empty(); }

  Eigen::Vector3d vertex_of(int tri, int corner) const {
    return vertices[triangles[tri][corner]];
  }
  double triangle_area(int tri) const;
  double total_area() const;
  Aabb bounds() const;

  // Throws std::runtime_error on index/normal/degeneracy violations.
  void validate() const;

  void append(const TriangleMesh& other);
  TriangleMesh transformed(const Pose& pose) const;
};

struct SurfacePointCloud {
  std::vector<Eigen::Vector3d> points;
  std::vector<Eigen::Vector3d> normals;
  std::string frame = "mesh";

  size_t size() const { return points.size(); }
  void validate() const;
  SurfacePointCloud transformed(const Pose& pose) const;
};

struct Ray {
  Eigen::Vector3d origin;
  Eigen::Vector3d direction;  // unit length

  Ray(const Eigen::Vector3d& o, const Eigen::Vector3d& d)
      : origin(o), direction(d.normalized()) {}
};

struct RayHit {
  double distance = 0.0;
  Eigen::Vector3d plane_support = Eigen::Vector3d::Zero();  // point on the hit plane
  Eigen::Vector3d plane_normal = Eigen::Vector3d::UnitZ();
  int triangle_index = -1;
};

// Area-weighted uniform surface sampling; each point carries its triangle's
// normal. Bit-identical output for identical (mesh, density, seed).
SurfacePointCloud sample_surface(const TriangleMesh& mesh, double density_per_m2,
                                 uint64_t seed);

}  // namespace mobiman::geometry
