#pragma once

#include <Eigen/Core>
#include <string>

#include "mobiman/control/kinematic_model.hpp"

namespace mobiman::control {

struct IkConfig {
  int max_iterations = 100;
  double tolerance = 1e-6;     // combined boxminus norm (m, rad)
  double damping = 1e-4;       // damped least squares lambda
  double max_step = 0.3;       // per-iteration joint step clamp, rad
};

struct IkResult {
  Eigen::Matrix<double, 6, 1> joints = Eigen::Matrix<double, 6, 1>::Zero();
  bool ok = false;
  double residual = 0.0;  // boxminus norm at the returned joints
  int iterations = 0;
  std::string diagnostic;
};

// Damped-least-squares inverse kinematics for the arm with the base pose
// frozen. Joints are clamped to the model limits every step; failure to reach
// `tolerance` returns the best visited configuration, flagged.
IkResult ik_solve(const KinematicModel& model, const geometry::Pose& target,
                  const Eigen::Matrix<double, 6, 1>& seed_joints,
                  const geometry::Pose2d& base_pose, const IkConfig& config = {});

}  // namespace mobiman::control
