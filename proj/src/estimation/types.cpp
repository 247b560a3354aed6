#include "mobiman/estimation/types.hpp"

#include <stdexcept>

namespace mobiman::estimation {

void Measurement::validate() const {
  switch (kind) {
    case MeasurementKind::kPoseUpdate:
      if (std::abs(pose.orientation.norm() - 1.0) > 1e-6)
        throw std::runtime_error("measurement: non-unit pose quaternion");
      break;
    case MeasurementKind::kWheelOdometry:
      if (!std::isfinite(wheel_left) || !std::isfinite(wheel_right))
        throw std::runtime_error("measurement: non-finite wheel speeds");
      break;
    case MeasurementKind::kImu:
      if (!angular_velocity.allFinite() || !specific_force.allFinite())
        throw std::runtime_error("measurement: non-finite imu payload");
      break;
  }
  for (double s : noise)
    if (!(s > 0.0)) throw std::runtime_error("measurement: noise stds must be > 0");
}

void EstimatorState::validate(int max_window) const {
  if (static_cast<int>(knots.size()) > max_window)
    throw std::runtime_error("estimator state: window longer than configured");
  for (size_t i = 1; i < knots.size(); ++i)
    if (!(knots[i].timestamp > knots[i - 1].timestamp))
      throw std::runtime_error("estimator state: timestamps not strictly increasing");
}

EstimatorState EstimatorState::boxplus(const Eigen::VectorXd& delta) const {
  if (delta.size() != dim()) throw std::runtime_error("estimator state: delta size mismatch");
  EstimatorState out = *this;
  for (size_t k = 0; k < knots.size(); ++k) {
    const int o = static_cast<int>(k) * 9;
    geometry::Vector6d dp;
    dp << delta.segment<3>(o), delta.segment<3>(o + 3);
    out.knots[k].pose = geometry::boxplus(knots[k].pose, dp);
    out.knots[k].velocity += delta.segment<3>(o + 6);
  }
  const int s = static_cast<int>(knots.size()) * 9;
  out.gyro_bias += delta.segment<3>(s);
  out.accel_bias += delta.segment<3>(s + 3);
  return out;
}

void MheConfig::validate() const {
  if (window_size < 2) throw std::runtime_error("mhe: window_size must be >= 2");
  if (knot_spacing <= 0.0) throw std::runtime_error("mhe: knot_spacing must be > 0");
  for (double s : {icp_sigma_pos, icp_sigma_rot, odom_sigma_moving, odom_sigma_stationary,
                   gyro_noise, accel_noise, gyro_bias_sigma, accel_bias_sigma,
                   prior_sigma_pos, prior_sigma_rot, prior_sigma_vel})
    if (!(s > 0.0)) throw std::runtime_error("mhe: noise stds must be > 0");
  if (!(odom_sigma_stationary < 0.1 * odom_sigma_moving))
    throw std::runtime_error("mhe: stationary odometry std must be well below moving std");
  if (wheel_radius <= 0.0 || track_width <= 0.0)
    throw std::runtime_error("mhe: wheel geometry must be positive");
}

}  // namespace mobiman::estimation
