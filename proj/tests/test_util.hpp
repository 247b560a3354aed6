#pragma once

#include <Eigen/Core>
#include <functional>
#include <optional>

#include "mobiman/common/rng.hpp"
#include "mobiman/geometry/mesh.hpp"
#include "mobiman/geometry/pose.hpp"

namespace test_util {

inline mobiman::geometry::Pose random_pose(mobiman::Rng& rng, double pos_range = 2.0) {
  Eigen::Vector3d axis(rng.normal(), rng.normal(), rng.normal());
  if (axis.norm() < 1e-6) axis = Eigen::Vector3d::UnitZ();
  axis.normalize();
  const double angle = rng.uniform(-M_PI * 0.9, M_PI * 0.9);
  return mobiman::geometry::Pose(
      Eigen::Vector3d(rng.uniform(-pos_range, pos_range), rng.uniform(-pos_range, pos_range),
                      rng.uniform(-pos_range, pos_range)),
      Eigen::Quaterniond(Eigen::AngleAxisd(angle, axis)));
}

// Central-difference Jacobian of f: R^n -> R^m.
inline Eigen::MatrixXd numeric_jacobian(
    const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& f,
    const Eigen::VectorXd& x, double h = 1e-6) {
  const Eigen::VectorXd f0 = f(x);
  Eigen::MatrixXd J(f0.size(), x.size());
  for (int j = 0; j < x.size(); ++j) {
    Eigen::VectorXd xp = x, xm = x;
    xp[j] += h;
    xm[j] -= h;
    J.col(j) = (f(xp) - f(xm)) / (2.0 * h);
  }
  return J;
}

inline double relative_error(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  const double scale = std::max(1.0, std::max(a.norm(), b.norm()));
  return (a - b).norm() / scale;
}

// Independent nearest-hit oracle: plane intersection plus a same-side
// membership test, deliberately not Moller-Trumbore.
inline std::optional<mobiman::geometry::RayHit> brute_force_raytrace(
    const mobiman::geometry::TriangleMesh& mesh, const mobiman::geometry::Ray& ray,
    double t_min = 1e-9) {
  using Eigen::Vector3d;
  std::optional<mobiman::geometry::RayHit> best;
  for (size_t i = 0; i < mesh.triangle_count(); ++i) {
    const Vector3d a = mesh.vertex_of(static_cast<int>(i), 0);
    const Vector3d b = mesh.vertex_of(static_cast<int>(i), 1);
    const Vector3d c = mesh.vertex_of(static_cast<int>(i), 2);
    const Vector3d n = (b - a).cross(c - a);
    const double denom = ray.direction.dot(n);
    if (std::abs(denom) < 1e-14) continue;
    const double t = (a - ray.origin).dot(n) / denom;
    if (t <= t_min) continue;
    if (best && t >= best->distance) continue;
    const Vector3d p = ray.origin + t * ray.direction;
    const double s0 = (b - a).cross(p - a).dot(n);
    const double s1 = (c - b).cross(p - b).dot(n);
    const double s2 = (a - c).cross(p - c).dot(n);
    const double tol = -1e-12 * n.squaredNorm();
    if (s0 < tol || s1 < tol || s2 < tol) continue;
    mobiman::geometry::RayHit hit;
    hit.distance = t;
    hit.triangle_index = static_cast<int>(i);
    hit.plane_support = a;
    hit.plane_normal = mesh.normals[i];
    best = hit;
  }
  return best;
}

}  // namespace test_util
