#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace mobiman::geometry {

inline Eigen::Matrix3d skew(const Eigen::Vector3d& v) {
  Eigen::Matrix3d m;
  m << 0.0, -v.z(), v.y(), v.z(), 0.0, -v.x(), -v.y(), v.x(), 0.0;
  return m;
}

inline Eigen::Matrix3d exp_so3(const Eigen::Vector3d& w) {
  const double a = w.norm();
  const Eigen::Matrix3d W = skew(w);
  if (a < 1e-9) return Eigen::Matrix3d::Identity() + W + 0.5 * W * W;
  return Eigen::Matrix3d::Identity() + std::sin(a) / a * W +
         (1.0 - std::cos(a)) / (a * a) * W * W;
}

inline Eigen::Vector3d log_so3(const Eigen::Matrix3d& R) {
  const double tr = std::min(3.0, std::max(-1.0, R.trace()));
  const double cos_a = 0.5 * (tr - 1.0);
  Eigen::Vector3d w(R(2, 1) - R(1, 2), R(0, 2) - R(2, 0), R(1, 0) - R(0, 1));
  const double sin_a = 0.5 * w.norm();
  const double a = std::atan2(sin_a, cos_a);
  if (a < 1e-9) return 0.5 * w;
  if (a > M_PI - 1e-6) {
    // Near pi the vector part vanishes; fall back to the quaternion route.
    Eigen::Quaterniond q(R);
    if (q.w() < 0.0) q.coeffs() = -q.coeffs();
    const double vn = q.vec().norm();
    return q.vec() * (2.0 * std::atan2(vn, q.w()) / vn);
  }
  return w * (0.5 * a / sin_a);
}

// Right Jacobian of exp on SO(3): exp(w + dw) ~ exp(w) exp(Jr(w) dw).
inline Eigen::Matrix3d right_jacobian_so3(const Eigen::Vector3d& w) {
  const double a = w.norm();
  const Eigen::Matrix3d W = skew(w);
  if (a < 1e-9) return Eigen::Matrix3d::Identity() - 0.5 * W + W * W / 6.0;
  const double a2 = a * a;
  return Eigen::Matrix3d::Identity() - (1.0 - std::cos(a)) / a2 * W +
         (a - std::sin(a)) / (a2 * a) * W * W;
}

inline Eigen::Matrix3d right_jacobian_inv_so3(const Eigen::Vector3d& w) {
  const double a = w.norm();
  const Eigen::Matrix3d W = skew(w);
  if (a < 1e-9) return Eigen::Matrix3d::Identity() + 0.5 * W + W * W / 12.0;
  const double a2 = a * a;
  const double c = 1.0 / a2 - (1.0 + std::cos(a)) / (2.0 * a * std::sin(a));
  return Eigen::Matrix3d::Identity() + 0.5 * W + c * W * W;
}

// Left Jacobian inverse: log(exp(dw) exp(w)) ~ w + Jl_inv(w) dw.
inline Eigen::Matrix3d left_jacobian_inv_so3(const Eigen::Vector3d& w) {
  return right_jacobian_inv_so3(-w);
}

}  // namespace mobiman::geometry
