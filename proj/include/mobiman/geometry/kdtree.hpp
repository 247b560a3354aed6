#pragma once

#include <Eigen/Core>
#include <vector>

namespace mobiman::geometry {

// Static 3-d tree for nearest-neighbor queries over a point set (the ICP map
// cloud). Built once, queried concurrently.
class KdTree3 {
 public:
  KdTree3() = default;
  explicit KdTree3(const std::vector<Eigen::Vector3d>& points);

  // Index of the nearest point within `radius`, or -1. Squared distance is
  // written to dist_sq when a neighbor is found.
  int nearest(const Eigen::Vector3d& query, double radius,
              double* dist_sq = nullptr) const;

  size_t size() const { return points_.size(); }

 private:
  struct Node {
    int axis = 0;
    double split = 0.0;
    int left = -1;
    int right = -1;
    int begin = 0;  // leaf range into order_
    int end = 0;
  };

  int build(int begin, int end, int depth);
  void search(int node, const Eigen::Vector3d& q, int& best, double& best_sq) const;

  std::vector<Eigen::Vector3d> points_;
  std::vector<int> order_;
  std::vector<Node> nodes_;
};

}  // namespace mobiman::geometry
