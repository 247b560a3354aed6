#pragma once

#include <string>
#include <vector>

#include "mobiman/geometry/bvh.hpp"
#include "mobiman/geometry/pose.hpp"

namespace mobiman::localization {

// Mounting poses of the laser distance sensors in the end-effector frame.
// Each sensor measures range along its own +x axis.
struct RangefinderExtrinsics {
  std::vector<geometry::Pose> sensor_in_ee;

  void validate() const;
};

// One end-effector viewpoint with the per-sensor measured distances.
// Viewpoint poses come from joint encoders and are treated as exact.
struct HalViewpoint {
  geometry::Pose ee_in_base;
  std::vector<double> distances;  // meters, one per sensor, > 0
};

struct HalObservationSet {
  std::vector<HalViewpoint> viewpoints;
  geometry::Pose base_guess;  // base pose in the model frame

  void validate(size_t sensor_count) const;
};

// Per-measurement diagnostic record, also the unit of the diagnostic log.
struct HalMeasurement {
  int viewpoint = 0;
  int sensor = 0;
  double measured = 0.0;
  double expected = 0.0;
  double residual = 0.0;
  bool inlier = true;
  bool hit = true;  // ray reached the model
};

struct HalEvaluation {
  std::vector<HalMeasurement> measurements;  // hits only
  double cost = 0.0;                         // sum of robust costs
  Eigen::Vector3d gradient = Eigen::Vector3d::Zero();  // d cost / d base position
  int misses = 0;
};

struct HalConfig {
  int outer_iterations = 5;      // plane re-retrieval loop
  int max_inner_iterations = 25; // damped Gauss-Newton steps per outer pass
  double cauchy_scale = 0.005;   // meters
  double inlier_threshold = 3.0; // |r| <= threshold * cauchy_scale

  void validate() const;
};

struct HalResult {
  Eigen::Vector3d position = Eigen::Vector3d::Zero();
  Eigen::Quaterniond orientation = Eigen::Quaterniond::Identity();  // == guess, untouched
  double cost = 0.0;
  std::vector<HalMeasurement> measurements;
  int outer_iterations_used = 0;
  bool converged = false;
  std::string diagnostic;
};

// Residuals and robust cost of the observation set at a candidate base
// position (orientation taken from obs.base_guess). Planes are retrieved by
// ray tracing from the candidate sensor poses; rays that miss the model are
// dropped from the cost. Throws if every ray misses.
HalEvaluation hal_residual(const Eigen::Vector3d& base_position,
                           const HalObservationSet& obs, const RangefinderExtrinsics& ext,
                           const geometry::Bvh& model, double cauchy_scale = 0.005,
                           double inlier_threshold = 3.0);

// High-accuracy localization: robustified position-only refinement with
// plane re-retrieval each outer iteration. The orientation of the result is
// bit-identical to the initial guess.
HalResult hal_localize(const HalObservationSet& obs, const RangefinderExtrinsics& ext,
                       const geometry::Bvh& model, const HalConfig& cfg = HalConfig());

// Line-delimited diagnostic log: one record per measurement plus a summary.
void write_hal_diag_log(const std::string& path, const HalResult& result);

}  // namespace mobiman::localization
