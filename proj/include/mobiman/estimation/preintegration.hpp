#pragma once

#include <Eigen/Core>

#include "mobiman/estimation/types.hpp"

namespace mobiman::estimation {

// Relative IMU constraint between two knots, integrated at a fixed bias
// linearization point. First-order bias corrections are carried as Jacobians
// so the optimizer can update biases without re-integration.
class ImuPreintegration {
 public:
  ImuPreintegration(const Eigen::Vector3d& gyro_bias_lin,
                    const Eigen::Vector3d& accel_bias_lin);

  void integrate(const Eigen::Vector3d& angular_velocity,
                 const Eigen::Vector3d& specific_force, double dt);

  double dt_total() const { return dt_total_; }
  int sample_count() const { return samples_; }
  const Eigen::Matrix3d& delta_R() const { return delta_R_; }
  const Eigen::Vector3d& delta_v() const { return delta_v_; }
  const Eigen::Vector3d& delta_p() const { return delta_p_; }
  const Eigen::Matrix3d& dR_dbg() const { return dR_dbg_; }
  const Eigen::Matrix3d& dv_dbg() const { return dv_dbg_; }
  const Eigen::Matrix3d& dv_dba() const { return dv_dba_; }
  const Eigen::Matrix3d& dp_dbg() const { return dp_dbg_; }
  const Eigen::Matrix3d& dp_dba() const { return dp_dba_; }
  const Eigen::Vector3d& gyro_bias_lin() const { return bg_lin_; }
  const Eigen::Vector3d& accel_bias_lin() const { return ba_lin_; }

 private:
  Eigen::Vector3d bg_lin_;
  Eigen::Vector3d ba_lin_;
  Eigen::Matrix3d delta_R_ = Eigen::Matrix3d::Identity();
  Eigen::Vector3d delta_v_ = Eigen::Vector3d::Zero();
  Eigen::Vector3d delta_p_ = Eigen::Vector3d::Zero();
  Eigen::Matrix3d dR_dbg_ = Eigen::Matrix3d::Zero();
  Eigen::Matrix3d dv_dbg_ = Eigen::Matrix3d::Zero();
  Eigen::Matrix3d dv_dba_ = Eigen::Matrix3d::Zero();
  Eigen::Matrix3d dp_dbg_ = Eigen::Matrix3d::Zero();
  Eigen::Matrix3d dp_dba_ = Eigen::Matrix3d::Zero();
  double dt_total_ = 0.0;
  int samples_ = 0;
};

}  // namespace mobiman::estimation
