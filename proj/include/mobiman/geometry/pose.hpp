#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace mobiman::geometry {

using Vector6d = Eigen::Matrix<double, 6, 1>;

// Rotation vector of q, shortest arc.
inline Eigen::Vector3d quat_log(const Eigen::Quaterniond& q_in) {
  Eigen::Quaterniond q = q_in;
  if (q.w() < 0.0) q.coeffs() = -q.coeffs();
  const double vn = q.vec().norm();
  if (vn < 1e-12) return 2.0 * q.vec() / q.w();
  const  double angle = 2.0 * std::atan2(vn, q.w());
  return q.vec() * (angle / vn);
}

inline Eigen::Quaterniond quat_exp(const Eigen::Vector3d& rotvec) {
  const double angle = rotvec.norm();
  if (angle < 1e-12) {
    Eigen::Quaterniond q(1.0, 0.5 * rotvec.x(), 0.5 * rotvec.y(), 0.5 * rotvec.z());
    q.normalize();
    return q;
  }
  const double half = 0.5 * angle;
  const Eigen::Vector3d axis = rotvec / angle;
  const double s = std::sin(half);
  return Eigen::Quaterniond(std::cos(half), s * axis.x(), s * axis.y(), s * axis.z());
}

inline double rotation_angle(const Eigen::Quaterniond& q) { return quat_log(q).norm(); }

// Rigid transform in SE(3): x_world = orientation * x_local + position.
struct Pose {
  Eigen::Vector3d position = Eigen::Vector3d::Zero();
  Eigen::Quaterniond orientation = Eigen::Quaterniond::Identity();

  Pose() = default;
  Pose(const Eigen::Vector3d& p, const Eigen::Quaterniond& q)
      : position(p), orientation(q.normalized()) {}

  static Pose identity() { return Pose(); }

  Eigen::Vector3d operator*(const Eigen::Vector3d& p) const {
    return position + orientation * p;
  }
  Pose operator*(const Pose& other) const {
    return Pose(position + orientation * other.position,
                orientation * other.orientation);
  }
};

inline Pose compose(const Pose& a, const Pose& b) {
  return Pose(a.position + a.orientation * b.position, a.orientation * b.orientation);
}

inline Pose inverse(const Pose& p) {
  const Eigen::Quaterniond qi = p.orientation.conjugate();
  return Pose(-(qi * p.position), qi);
}

// Generalized difference: position delta plus the rotation vector of
// a.orientation relative to b.orientation (global frame).
inline Vector6d boxminus(const Pose& a, const Pose& b) {
  Vector6d d;
  d.head<3>() = a.position - b.position;
  d.tail<3>() = quat_log(a.orientation * b.orientation.conjugate());
  return d;
}

inline Pose boxplus(const Pose& p, const Vector6d& delta) {
  return Pose(p.position + delta.head<3>(),
              quat_exp(delta.tail<3>()) * p.orientation);
}

// Planar pose on the floor, used by the base planner.
struct Pose2d {
  double x = 0.0;
  double y = 0.0;
  double theta = 0.0;
};

inline double wrap_angle(double a) {
  a = std::fmod(a + M_PI, 2.0 * M_PI);
  if (a < 0.0) a += 2.0 * M_PI;
  return a - M_PI;
}

inline Pose planar_to_pose(const Pose2d& p, double z = 0.0) {
  return Pose(Eigen::Vector3d(p.x, p.y, z),
              Eigen::Quaterniond(Eigen::AngleAxisd(p.theta, Eigen::Vector3d::UnitZ())));
}

}  // namespace mobiman::geometry
