#pragma once

#include <Eigen/Core>
#include <vector>

#include "mobiman/estimation/preintegration.hpp"
#include "mobiman/estimation/types.hpp"

namespace mobiman::estimation {

// Whitened error and its Jacobian with respect to the stacked window
// perturbation (see EstimatorState::boxplus for the layout).
struct EvaluatedTerm {
  Eigen::VectorXd error;
  Eigen::MatrixXd jacobian;
};

// Absolute pose constraint on knot `k`.
EvaluatedTerm pose_update_term(const EstimatorState& st, int k, const Measurement& z,
                               const MheConfig& cfg);

// Relative constraint between knots k and k+1 from averaged wheel speeds.
// `stationary` selects the tight noise model.
EvaluatedTerm odometry_term(const EstimatorState& st, int k, double wheel_left,
                            double wheel_right, bool stationary, const MheConfig& cfg);

// Preintegrated IMU constraint between knots k and k+1.
EvaluatedTerm imu_term(const EstimatorState& st, int k, const ImuPreintegration& preint,
                       const MheConfig& cfg);

// Prior anchoring the oldest knot and the static parameters.
struct PriorInfo {
  Knot knot;
  Eigen::Vector3d gyro_bias = Eigen::Vector3d::Zero();
  Eigen::Vector3d accel_bias = Eigen::Vector3d::Zero();
  bool active = false;
};

EvaluatedTerm prior_term(const EstimatorState& st, const PriorInfo& prior,
                         const MheConfig& cfg);

// Spec-level entry point: evaluates the error for one logical constraint.
// A single pose_update or a batch of odometry/imu samples belonging to one
// knot interval; association is by timestamp. Throws when a timestamp falls
// outside the window.
Eigen::VectorXd error_term(const EstimatorState& window,
                           const std::vector<Measurement>& z, const MheConfig& cfg);

// Same association, returning the Jacobian as well (used by tests).
EvaluatedTerm error_term_with_jacobian(const EstimatorState& window,
                                       const std::vector<Measurement>& z,
                                       const MheConfig& cfg);

}  // namespace mobiman::estimation
