#include "mobiman/estimation/preintegration.hpp"

#include "mobiman/geometry/so3.hpp"

namespace mobiman::estimation {

ImuPreintegration::ImuPreintegration(const Eigen::Vector3d& gyro_bias_lin,
                                     const Eigen::Vector3d& accel_bias_lin)
    : bg_lin_(gyro_bias_lin), ba_lin_(accel_bias_lin) {}

void ImuPreintegration::integrate(const Eigen::Vector3d& angular_velocity,
                                  const Eigen::Vector3d& specific_force, double dt) {
  using geometry::exp_so3;
  using geometry::right_jacobian_so3;
  using geometry::skew;

  const Eigen::Vector3d w = angular_velocity - bg_lin_;
  const Eigen::Vector3d a = specific_force - ba_lin_;
  const Eigen::Matrix3d dR = exp_so3(w * dt);
  const Eigen::Matrix3d Jr = right_jacobian_so3(w * dt);
  const Eigen::Matrix3d Ra = delta_R_ * skew(a);

  // Position and velocity updates use the pre-update orientation and
  // Jacobians, so the order below matters.
  dp_dbg_ += dv_dbg_ * dt - 0.5 * Ra * dR_dbg_ * dt * dt;
  dp_dba_ += dv_dba_ * dt - 0.5 * delta_R_ * dt * dt;
  dv_dbg_ += -Ra * dR_dbg_ * dt;
  dv_dba_ += -delta_R_ * dt;
  dR_dbg_ = dR.transpose() * dR_dbg_ - Jr * dt;

  delta_p_ += delta_v_ * dt + 0.5 * delta_R_ * a * dt * dt;
  delta_v_ += delta_R_ * a * dt;
  delta_R_ = delta_R_ * dR;

  dt_total_ += dt;
  ++samples_;
}

}  // namespace mobiman::estimation
