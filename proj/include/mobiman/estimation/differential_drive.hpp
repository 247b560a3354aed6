#pragma once

#include <cmath>

#include "mobiman/geometry/pose.hpp"

namespace mobiman::estimation {

// Exact arc integration of the differential-drive kinematics over dt:
// v = r (wl + wr) / 2, yaw rate = r (wr - wl) / track. The arc is traversed
// in the body frame and composed onto the pose (body z is the turn axis).
inline geometry::Pose differential_drive_predict(const geometry::Pose& pose, double wheel_left,
                                                 double wheel_right, double wheel_radius,
                                                 double track_width, double dt) {
  const double v = wheel_radius * (wheel_left + wheel_right) * 0.5;
  const double omega = wheel_radius * (wheel_right - wheel_left) / track_width;
  const double dtheta = omega * dt;

  double dx, dy;
  if (std::abs(dtheta) < 1e-10) {
    // Straight-line limit with the second-order curvature term.
    dx = v * dt;
    dy = 0.5 * v * dt * dtheta;
  } else {
    const double radius = v / omega;
    dx = radius * std::sin(dtheta);
    dy = radius * (1.0 - std::cos(dtheta));
  }

  geometry::Pose out;
  out.position = pose.position + pose.orientation * Eigen::Vector3d(dx, dy, 0.0);
  out.orientation =
      pose.orientation *
      Eigen::Quaterniond(Eigen::AngleAxisd(dtheta, Eigen::Vector3d::UnitZ()));
  return out;
}

}  // namespace mobiman::estimation
