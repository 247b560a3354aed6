#pragma once

#include <Eigen/Core>
#include <vector>

#include "mobiman/geometry/pose.hpp"

namespace mobiman::estimation {

enum class MeasurementKind { kPoseUpdate, kWheelOdometry, kImu };

// One timestamped measurement. The payload fields used depend on kind:
//   pose_update    -> pose (+ noise[0] = sigma_pos, noise[1] = sigma_rot)
//   wheel_odometry -> wheel_left, wheel_right [rad/s]
//   imu            -> angular_velocity [rad/s], specific_force [m/s^2]
// An empty noise vector means "use the estimator config defaults".
struct Measurement {
  double timestamp = 0.0;
  MeasurementKind kind = MeasurementKind::kPoseUpdate;
  geometry::Pose pose;
  double wheel_left = 0.0;
  double wheel_right = 0.0;
  Eigen::Vector3d angular_velocity = Eigen::Vector3d::Zero();
  Eigen::Vector3d specific_force = Eigen::Vector3d::Zero();
  std::vector<double> noise;

  void validate() const;
};

struct Knot {
  double timestamp = 0.0;
  geometry::Pose pose;
  Eigen::Vector3d velocity = Eigen::Vector3d::Zero();
};

// Window of knot states plus the static parameters estimated alongside them.
struct EstimatorState {
  std::vector<Knot> knots;
  Eigen::Vector3d gyro_bias = Eigen::Vector3d::Zero();
  Eigen::Vector3d accel_bias = Eigen::Vector3d::Zero();

  void validate(int max_window) const;

  // Decision-vector layout: per knot [dp(3), dtheta(3), dv(3)] then
  // [dbg(3), dba(3)]. Used by the solver and the finite-difference tests.
  int dim() const { return static_cast<int>(knots.size()) * 9 + 6; }
  EstimatorState boxplus(const Eigen::VectorXd& delta) const;
};

struct MheConfig {
  int window_size = 10;                  // knots
  double knot_spacing = 0.1;             // seconds
  double icp_sigma_pos = 0.03;           // m
  double icp_sigma_rot = 1.0 * M_PI / 180.0;  // rad
  double odom_sigma_moving = 0.01;       // per-interval m / rad
  double odom_sigma_stationary = 1e-5;   // much tighter when wheels are still
  double stationary_threshold = 1e-3;    // rad/s, both wheels below => stationary
  double gyro_noise = 1.0e-3;            // rad/s/sqrt(Hz)
  double accel_noise = 1.0e-2;           // m/s^2/sqrt(Hz)
  double gyro_bias_sigma = 1.0e-2;       // prior std, rad/s
  double accel_bias_sigma = 1.0e-1;      // prior std, m/s^2
  double prior_sigma_pos = 0.005;        // marginalization prior on oldest knot
  double prior_sigma_rot = 0.005;
  double prior_sigma_vel = 0.05;
  Eigen::Vector3d gravity = Eigen::Vector3d(0, 0, -9.81);
  double wheel_radius = 0.1;             // m
  double track_width = 0.5;              // m
  double max_imu_gap = 0.05;             // s, beyond this propagation is stale

  void validate() const;
};

struct PropagatedState {
  geometry::Pose pose;
  Eigen::Vector3d velocity = Eigen::Vector3d::Zero();
  bool stale = false;
};

}  // namespace mobiman::estimation
