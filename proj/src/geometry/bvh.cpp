#include "mobiman/geometry/bvh.hpp"

#include <algorithm>
#include <numeric>

#include "mobiman/kernels/kernels.hpp"

namespace mobiman::geometry {

namespace {

constexpr int kLeafSize = 8;
constexpr double kHitEps = 1e-9;  // rejects self-intersection at the origin

inline bool ray_aabb(const Eigen::Vector3d& bmin, const Eigen::Vector3d& bmax,
                     const Eigen::Vector3d& o, const Eigen::Vector3d& inv_d,
                     double t_max, double& t_entry) {
  double t0 = 0.0, t1 = t_max;
  for (int k = 0; k < 3; ++k) {
    const double ta = (bmin[k] - o[k]) * inv_d[k];
    const double tb = (bmax[k] - o[k]) * inv_d[k];
    t0 = std::max(t0, std::min(ta, tb));
    t1 = std::min(t1, std::max(ta, tb));
  }
  t_entry = t0;
  return t0 <= t1;
}

}  // namespace

Bvh::Bvh(const TriangleMesh& mesh) : mesh_(&mesh) {
  if (mesh.empty()) return;
  std::vector<int> tris(mesh.triangle_count());
  std::iota(tris.begin(), tris.end(), 0);
  nodes_.reserve(2 * tris.size());
  build(tris, 0, static_cast<int>(tris.size()), 0);
}

int32_t Bvh::build(std::vector<int>& tris, int begin, int end, int depth) {
  Node node;
  Aabb box;
  Aabb centroid_box;
  for (int i = begin; i < end; ++i) {
    Eigen::Vector3d c = Eigen::Vector3d::Zero();
    for (int k = 0; k < 3; ++k) {
      const Eigen::Vector3d v = mesh_->vertex_of(tris[i], k);
      box.expand(v);
      c += v;
    }
    centroid_box.expand(c / 3.0);
  }
  node.bmin = box.min;
  node.bmax = box.max;

  const int count = end - begin;
  if (count <= kLeafSize || depth > 48) {
    node.first = static_cast<int32_t>(slot_to_tri_.size());
    node.count = ((count + 3) / 4) * 4;  // pad to the SIMD width
    for (int i = 0; i < node.count; ++i) {
      if (i < count) {
        const int t = tris[begin + i];
        const Eigen::Vector3d a = mesh_->vertex_of(t, 0);
        const Eigen::Vector3d e1 = mesh_->vertex_of(t, 1) - a;
        const Eigen::Vector3d e2 = mesh_->vertex_of(t, 2) - a;
        ax_.push_back(a.x());
        ay_.push_back(a.y());
        az_.push_back(a.z());
        e1x_.push_back(e1.x());
        e1y_.push_back(e1.y());
        e1z_.push_back(e1.z());
        e2x_.push_back(e2.x());
        e2y_.push_back(e2.y());
        e2z_.push_back(e2.z());
        slot_to_tri_.push_back(t);
      } else {
        ax_.push_back(0.0);
        ay_.push_back(0.0);
        az_.push_back(0.0);
        e1x_.push_back(0.0);
        e1y_.push_back(0.0);
        e1z_.push_back(0.0);
        e2x_.push_back(0.0);
        e2y_.push_back(0.0);
        e2z_.push_back(0.0);
        slot_to_tri_.push_back(-1);
      }
    }
    nodes_.push_back(node);
    return static_cast<int32_t>(nodes_.size() - 1);
  }

  // Split at the centroid median along the widest centroid axis.
  int axis = 0;
  const Eigen::Vector3d extent = centroid_box.max - centroid_box.min;
  if (extent.y() > extent.x()) axis = 1;
  if (extent.z() > extent[axis]) axis = 2;
  const int mid = begin + count / 2;
  std::nth_element(tris.begin() + begin, tris.begin() + mid, tris.begin() + end,
                   [&](int a, int b) {
                     double ca = 0.0, cb = 0.0;
                     for (int k = 0; k < 3; ++k) {
                       ca += mesh_->vertex_of(a, k)[axis];
                       cb += mesh_->vertex_of(b, k)[axis];
                     }
                     return ca < cb;
                   });

  const int32_t self = static_cast<int32_t>(nodes_.size());
  nodes_.push_back(node);
  const int32_t left = build(tris, begin, mid, depth + 1);
  const int32_t right = build(tris, mid, end, depth + 1);
  nodes_[self].left = left;
  nodes_[self].right = right;
  return self;
}

std::optional<RayHit> Bvh::raytrace(const Ray& ray, double t_max) const {
  if (nodes_.empty()) return std::nullopt;

  const Eigen::Vector3d inv_d(1.0 / ray.direction.x(), 1.0 / ray.direction.y(),
                              1.0 / ray.direction.z());
  const double org[3] = {ray.origin.x(), ray.origin.y(), ray.origin.z()};
  const double dir[3] = {ray.direction.x(), ray.direction.y(), ray.direction.z()};

  double best_t = t_max;
  int best_tri = -1;

  int32_t stack[64];
  int top = 0;
  stack[top++] = 0;
  while (top > 0) {
    const Node& node = nodes_[stack[--top]];
    double t_entry;
    if (!ray_aabb(node.bmin, node.bmax, ray.origin, inv_d, best_t, t_entry)) continue;
    if (node.count > 0) {
      kernels::TriBlockSoA block{ax_.data() + node.first,  ay_.data() + node.first,
                                 az_.data() + node.first,  e1x_.data() + node.first,
                                 e1y_.data() + node.first, e1z_.data() + node.first,
                                 e2x_.data() + node.first, e2y_.data() + node.first,
                                 e2z_.data() + node.first, node.count};
      const auto hit = kernels::ray_block_nearest(block, org, dir, kHitEps, best_t);
      if (hit.slot >= 0) {
        const int tri = slot_to_tri_[node.first + hit.slot];
        if (tri >= 0 && hit.t < best_t) {
          best_t = hit.t;
          best_tri = tri;
        }
      }
    } else {
      // Visit the nearer child first so best_t tightens early.
      double ta = std::numeric_limits<double>::infinity();
      double tb = std::numeric_limits<double>::infinity();
      const bool ha = ray_aabb(nodes_[node.left].bmin, nodes_[node.left].bmax,
                               ray.origin, inv_d, best_t, ta);
      const bool hb = ray_aabb(nodes_[node.right].bmin, nodes_[node.right].bmax,
                               ray.origin, inv_d, best_t, tb);
      if (ha && hb) {
        if (ta <= tb) {
          stack[top++] = node.right;
          stack[top++] = node.left;
        } else {
          stack[top++] = node.left;
          stack[top++] = node.right;
        }
      } else if (ha) {
        stack[top++] = node.left;
      } else if (hb) {
        stack[top++] = node.right;
      }
    }
  }

  if (best_tri < 0) return std::nullopt;
  RayHit hit;
  hit.distance = best_t;
  hit.triangle_index = best_tri;
  hit.plane_support = mesh_->vertex_of(best_tri, 0);
  hit.plane_normal = mesh_->normals[best_tri];
  return hit;
}

}  // namespace mobiman::geometry
