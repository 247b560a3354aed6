#pragma once

#include <optional>
#include <vector>

#include "mobiman/geometry/mesh.hpp"

namespace mobiman::geometry {

// Bounding-volume hierarchy over a triangle mesh, rebuilt per mesh load
// (meshes are static per scenario). Leaves hold SoA triangle blocks padded
// to the SIMD width so the intersection kernel runs unconditionally.
class Bvh {
 public:
  Bvh() = default;
  explicit Bvh(const TriangleMesh& mesh);

  // Nearest intersection with distance in (1e-9, t_max), or nullopt.
  // plane_support is a vertex of the hit triangle, plane_normal the mesh's
  // per-triangle normal.
  std::optional<RayHit> raytrace(const Ray& ray,
                                 double t_max = std::numeric_limits<double>::infinity()) const;

  bool empty() const { return nodes_.empty(); }

 private:
  struct Node {
    Eigen::Vector3d bmin, bmax;
    int32_t left = -1;    // internal: child indices
    int32_t right = -1;
    int32_t first = -1;   // leaf: slot range [first, first + count)
    int32_t count = 0;
  };

  int32_t build(std::vector<int>& tris, int begin, int end, int depth);

  const TriangleMesh* mesh_ = nullptr;
  std::vector<Node> nodes_;
  // Leaf triangle data, SoA, padded per leaf to a multiple of 4.
  std::vector<double> ax_, ay_, az_, e1x_, e1y_, e1z_, e2x_, e2y_, e2z_;
  std::vector<int32_t> slot_to_tri_;
};

}  // namespace mobiman::geometry
