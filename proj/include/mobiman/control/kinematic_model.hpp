#pragma once

#include <Eigen/Core>
#include <array>
#include <string>

#include "mobiman/geometry/pose.hpp"

namespace mobiman::control {

// Whole-body configuration (x_b, y_b, theta_b, q_0..q_5) and its velocity
// (v_b, theta_dot_b, qdot_0..qdot_5). The base is differential-drive, so v_b
// acts along the base heading.
using RobotState9 = Eigen::Matrix<double, 9, 1>;
using ControlInput9 = Eigen::Matrix<double, 9, 1>;

inline geometry::Pose base_pose_of(const RobotState9& x) {
  return geometry::Pose(
      Eigen::Vector3d(x[0], x[1], 0.0),
      Eigen::Quaterniond(Eigen::AngleAxisd(x[2], Eigen::Vector3d::UnitZ())));
}

// Six-revolute-joint arm on a planar base. Joint i's frame is reached by the
// parent frame composed with `fixed`, then rotated about `axis` by q_i.
struct KinematicModel {
  struct Joint {
    geometry::Pose fixed;
    Eigen::Vector3d axis = Eigen::Vector3d::UnitZ();  // unit, in joint frame
    double limit_lower = -2.8;
    double limit_upper = 2.8;
    double velocity_limit = 0.8;  // rad/s
  };

  geometry::Pose mount;      // base frame -> arm root
  std::array<Joint, 6> joints;
  geometry::Pose ee_offset;  // last joint frame -> end-effector
  Eigen::Matrix<double, 6, 1> default_arm =
      Eigen::Matrix<double, 6, 1>::Zero();  // posture regularization target
  double base_velocity_limit = 0.6;         // m/s
  double base_yaw_rate_limit = 0.8;         // rad/s

  // Per-input magnitude bounds in control layout order.
  ControlInput9 input_limits() const;
  // Default posture embedded in the 9-dim state (base entries zero).
  RobotState9 default_state() const;

  // Throws std::runtime_error on non-unit axes, inverted limits, or
  // nonpositive velocity bounds.
  void validate() const;
};

// End-effector pose in the world frame.
geometry::Pose forward_kinematics(const KinematicModel& model, const RobotState9& x);

// Geometric Jacobian of the end-effector pose: rows 0-2 linear, rows 3-5
// angular velocity in world coordinates (left/global perturbation, matching
// Pose boxminus).
Eigen::Matrix<double, 6, 9> ee_jacobian(const KinematicModel& model,
                                        const RobotState9& x);

// A desk-scale 6-DoF arm with a forward-mounted root; the stand-in for the
// hardware description file in simulation scenarios.
KinematicModel default_arm_model();

// Key/value model file: mount + per-joint transform/axis/limits + ee offset.
KinematicModel load_kinematic_model(const std::string& path);
void save_kinematic_model(const std::string& path, const KinematicModel& model);

}  // namespace mobiman::control
