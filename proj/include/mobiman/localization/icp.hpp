#pragma once

#include <vector>

#include "mobiman/geometry/kdtree.hpp"
#include "mobiman/geometry/mesh.hpp"
#include "mobiman/geometry/pose.hpp"

namespace mobiman::localization {

struct IcpConfig {
  int max_iterations = 30;
  double correspondence_radius = 0.5;        // meters
  double convergence_translation = 1e-6;     // meters
  double convergence_rotation = 1e-6;        // radians
  double outlier_trim_ratio = 0.1;           // worst fraction dropped per iteration

  void validate() const;
};

struct IcpResult {
  geometry::Pose pose;                   // scan frame -> map frame
  double mean_residual = 0.0;            // mean |point-to-plane| after trimming
  double matched_fraction = 0.0;         // correspondences within radius / scan size
  int iterations_used = 0;
  bool converged = false;
  // Mean residual after each accepted iteration; non-increasing by construction.
  std::vector<double> residual_history;
};

// Point-to-plane ICP of `scan` against `map` (whose normals define the
// planes). Returns the pose T minimizing sum((T p - q) . n)^2 over
// nearest-neighbor correspondences within the radius. Fewer than 6
// correspondences at any iteration yields converged = false, pose = init.
IcpResult icp_point_to_plane(const geometry::SurfacePointCloud& scan,
                             const geometry::SurfacePointCloud& map,
                             const geometry::Pose& init, const IcpConfig& cfg);

// Same, reusing a nearest-neighbor tree built once over map.points; the
// form repeated callers with a static map should use.
IcpResult icp_point_to_plane(const geometry::SurfacePointCloud& scan,
                             const geometry::SurfacePointCloud& map,
                             const geometry::KdTree3& tree, const geometry::Pose& init,
                             const IcpConfig& cfg);

}  // namespace mobiman::localization
