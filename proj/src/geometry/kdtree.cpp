#include "mobiman/geometry/kdtree.hpp"

#include <algorithm>
#include <numeric>

namespace mobiman::geometry {

namespace {
constexpr int kLeafSize = 16;
}

KdTree3::KdTree3(const std::vector<Eigen::Vector3d>& points) : points_(points) {
  order_.resize(points_.size());
  std::iota(order_.begin(), order_.end(), 0);
  if (!points_.empty()) build(0, static_cast<int>(points_.size()), 0);
}

int KdTree3::build(int begin, int end, int depth) {
  Node node;
  node.begin = begin;
  node.end = end;
  if (end - begin <= kLeafSize) {
    nodes_.push_back(node);
    return static_cast<int>(nodes_.size() - 1);
  }
  // Widest-extent axis keeps cells roughly cubical.
  Eigen::Vector3d lo = Eigen::Vector3d::Constant(std::numeric_limits<double>::max());
  Eigen::Vector3d hi = -lo;
  for (int i = begin; i < end; ++i) {
    lo = lo.cwiseMin(points_[order_[i]]);
    hi = hi.cwiseMax(points_[order_[i]]);
  }
  const Eigen::Vector3d extent = hi - lo;
  int axis = 0;
  if (extent.y() > extent.x()) axis = 1;
  if (extent.z() > extent[axis]) axis = 2;

  const int mid = begin + (end - begin) / 2;
  std::nth_element(order_.begin() + begin, order_.begin() + mid, order_.begin() + end,
                   [&](int a, int b) { return points_[a][axis] < points_[b][axis]; });
  node.axis = axis;
  node.split = points_[order_[mid]][axis];

  const int self = static_cast<int>(nodes_.size());
  nodes_.push_back(node);
  const int left = build(begin, mid, depth + 1);
  const int right = build(mid, end, depth + 1);
  nodes_[self].left = left;
  nodes_[self].right = right;
  nodes_[self].begin = nodes_[self].end = 0;
  return self;
}

void KdTree3::search(int node_idx, const Eigen::Vector3d& q, int& best,
                     double& best_sq) const {
  const Node& node = nodes_[node_idx];
  if (node.left < 0) {
    for (int i = node.begin; i < node.end; ++i) {
      const double d = (points_[order_[i]] - q).squaredNorm();
      if (d < best_sq) {
        best_sq = d;
        best = order_[i];
      }
    }
    return;
  }
  const double diff = q[node.axis] - node.split;
  const int near = diff < 0.0 ? node.left : node.right;
  const int far = diff < 0.0 ? node.right : node.left;
  search(near, q, best, best_sq);
  if (diff * diff < best_sq) search(far, q, best, best_sq);
}

int KdTree3::nearest(const Eigen::Vector3d& query, double radius, double* dist_sq) const {
  if (nodes_.empty()) return -1;
  int best = -1;
  double best_sq = radius * radius;
  search(0, query, best, best_sq);
  if (best >= 0 && dist_sq) *dist_sq = best_sq;
  return best;
}

}  // namespace mobiman::geometry
