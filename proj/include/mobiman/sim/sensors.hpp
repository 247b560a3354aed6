#pragma once

#include <optional>
#include <vector>

#include "mobiman/estimation/types.hpp"
#include "mobiman/geometry/mesh.hpp"
#include "mobiman/geometry/pose.hpp"
#include "mobiman/sim/world.hpp"

namespace mobiman::sim {

// Multi-ring spinning scanner: `rings` elevation angles evenly spaced over
// [vertical_min, vertical_max], `azimuth_steps` horizontal directions per
// revolution.
struct LidarPattern {
  int rings = 16;
  double vertical_min = -15.0 * M_PI / 180.0;  // rad
  double vertical_max = 15.0 * M_PI / 180.0;   // rad
  int azimuth_steps = 360;
  double max_range = 30.0;  // m

  // Throws std::runtime_error on degenerate ring/azimuth counts or an
  // inverted elevation interval.
  void validate() const;
};

// One full scan from `sensor_pose` (world frame) at `time`, against the
// as-built mesh plus live obstacles. Points are returned in the sensor
// frame with the hit triangle's normal rotated into the sensor frame; range
// noise is additive along the beam; beams that miss are dropped. Identical
// inputs and seed reproduce the scan bit-exactly.
geometry::SurfacePointCloud simulate_lidar(const SimWorld& world,
                                           const geometry::Pose& sensor_pose,
                                           const LidarPattern& pattern,
                                           const NoiseConfig& noise, uint64_t seed,
                                           double time = 0.0);

// Single range measurement along the sensor's +x axis from `sensor_pose`
// (world frame), with additive Gaussian noise. nullopt when the ray hits
// nothing within max_range.
std::optional<double> simulate_rangefinder(const SimWorld& world,
                                           const geometry::Pose& sensor_pose,
                                           const NoiseConfig& noise, uint64_t seed,
                                           double max_range = 30.0, double time = 0.0);

// Timestamped ground-truth pose sample, the unit of the trajectory traces
// the inertial sensor models differentiate.
struct PoseSample {
  double t = 0.0;
  geometry::Pose pose;
};

// IMU stream over a trajectory segment: body-frame angular velocity and
// specific force (gravity included) at `rate`, from central differences of
// the sensor-frame pose trace (base pose composed with the mount, so lever
// arm effects fall out of the differentiation). Bias is added as configured,
// white noise at the per-sample sigma implied by the density and rate.
// Samples require a trace neighbor on each side, so the first and last
// trace instants carry no output.
std::vector<estimation::Measurement> simulate_imu(const std::vector<PoseSample>& base_trace,
                                                  const geometry::Pose& imu_in_base,
                                                  const Eigen::Vector3d& gravity,
                                                  double rate, const NoiseConfig& noise,
                                                  uint64_t seed);

// Wheel odometry at `timestamp`: the wheels spin at the actuator rates (the
// slip happens between tire and ground, not in the encoder), inverted
// through the differential-drive model, plus per-wheel Gaussian noise.
estimation::Measurement simulate_encoders(const SimRobot& robot, double timestamp,
                                          const NoiseConfig& noise, uint64_t seed);

}  // namespace mobiman::sim
