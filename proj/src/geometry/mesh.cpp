#include "mobiman/geometry/mesh.hpp"

#include <algorithm>
#include <stdexcept>

#include "mobiman/common/rng.hpp"

namespace mobiman::geometry {

namespace {
constexpr double kMinArea = 1e-12;
}

TriangleMesh TriangleMesh::from_triangles(std::vector<Eigen::Vector3d> vertices,
                                          std::vector<Eigen::Vector3i> triangles,
                                          const std::string& frame) {
  TriangleMesh mesh;
  mesh.vertices = std::move(vertices);
  mesh.frame = frame;
  mesh.triangles.reserve(triangles.size());
  mesh.normals.reserve(triangles.size());
  for (const auto& tri : triangles) {
    for (int k = 0; k < 3; ++k)
      if (tri[k] < 0 || tri[k] >= static_cast<int>(mesh.vertices.size()))
        throw std::runtime_error("mesh: triangle index out of range");
    const Eigen::Vector3d a = mesh.vertices[tri[0]];
    const Eigen::Vector3d n =
        (mesh.vertices[tri[1]] - a).cross(mesh.vertices[tri[2]] - a);
    const double area = 0.5 * n.norm();
    if (area <= kMinArea) continue;  // drop degenerate faces
    mesh.triangles.push_back(tri);
    mesh.normals.push_back(n / n.norm());
  }
  return mesh;
}

double TriangleMesh::triangle_area(int tri) const {
  const Eigen::Vector3d a = vertex_of(tri, 0);
  return 0.5 * (vertex_of(tri, 1) - a).cross(vertex_of(tri, 2) - a).norm();
}

double TriangleMesh::total_area() const {
  double area = 0.0;
  for (size_t i = 0; i < triangles.size(); ++i) area += triangle_area(static_cast<int>(i));
  return area;
}

Aabb TriangleMesh::bounds() const {
  Aabb box;
  for (const auto& v : vertices) box.expand(v);
  return box;
}

void TriangleMesh::validate() const {
  if (normals.size() != triangles.size())
    throw std::runtime_error("mesh: normal count mismatch");
  const int n = static_cast<int>(vertices.size());
  for (size_t i = 0; i < triangles.size(); ++i) {
    const auto& tri = triangles[i];
    if (tri[0] < 0 || tri[0] >= n || tri[1] < 0 || tri[1] >= n || tri[2] < 0 || tri[2] >= n)
      throw std::runtime_error("mesh: triangle index out of range");
    if (triangle_area(static_cast<int>(i)) <= kMinArea)
      throw std::runtime_error("mesh: degenerate triangle");
    if (std::abs(normals[i].norm() - 1.0) > 1e-9)
      throw std::runtime_error("mesh: non-unit normal");
  }
}

void TriangleMesh::append(const TriangleMesh& other) {
  const int offset = static_cast<int>(vertices.size());
  vertices.insert(vertices.end(), other.vertices.begin(), other.vertices.end());
  for (const auto& tri : other.triangles)
    triangles.push_back(Eigen::Vector3i(tri[0] + offset, tri[1] + offset, tri[2] + offset));
  normals.insert(normals.end(), other.normals.begin(), other.normals.end());
}

TriangleMesh TriangleMesh::transformed(const Pose& pose) const {
  TriangleMesh out = *this;
  for (auto& v : out.vertices) v = pose * v;
  for (auto& n : out.normals) n = pose.orientation * n;
  return out;
}

void SurfacePointCloud::validate() const {
  if (points.size() != normals.size())
    throw std::runtime_error("cloud: point/normal count mismatch");
  for (const auto& n : normals)
    if (std::abs(n.norm() - 1.0) > 1e-9) throw std::runtime_error("cloud: non-unit normal");
}

SurfacePointCloud SurfacePointCloud::transformed(const Pose& pose) const {
  SurfacePointCloud out;
  out.frame = frame;
  out.points.reserve(points.size());
  out.normals.reserve(normals.size());
  for (const auto& p : points) out.points.push_back(pose * p);
  for (const auto& n : normals) out.normals.push_back(pose.orientation * n);
  return out;
}

SurfacePointCloud sample_surface(const TriangleMesh& mesh, double density_per_m2,
                                 uint64_t seed) {
  if (density_per_m2 <= 0.0) throw std::runtime_error("sample_surface: density must be > 0");
  SurfacePointCloud cloud;
  cloud.frame = mesh.frame;
  if (mesh.empty()) throw std::runtime_error("sample_surface: empty mesh");

  std::vector<double> cumulative(mesh.triangle_count());
  double area = 0.0;
  for (size_t i = 0; i < mesh.triangle_count(); ++i) {
    area += mesh.triangle_area(static_cast<int>(i));
    cumulative[i] = area;
  }
  const auto count = static_cast<size_t>(std::llround(area * density_per_m2));
  cloud.points.reserve(count);
  cloud.normals.reserve(count);

  Rng rng(seed);
  for (size_t i = 0; i < count; ++i) {
    const double pick = rng.uniform01() * area;
    const auto it = std::lower_bound(cumulative.begin(), cumulative.end(), pick);
    const int tri = static_cast<int>(std::min<size_t>(
        std::distance(cumulative.begin(), it), mesh.triangle_count() - 1));
    double u = rng.uniform01();
    double v = rng.uniform01();
    if (u + v > 1.0) {
      u = 1.0 - u;
      v = 1.0 - v;
    }
    const Eigen::Vector3d a = mesh.vertex_of(tri, 0);
    cloud.points.push_back(a + u * (mesh.vertex_of(tri, 1) - a) +
                           v * (mesh.vertex_of(tri, 2) - a));
    cloud.normals.push_back(mesh.normals[tri]);
  }
  return cloud;
}

}  // namespace mobiman::geometry
