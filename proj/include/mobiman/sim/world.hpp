#pragma once

#include <memory>
#include <vector>

#include "mobiman/control/kinematic_model.hpp"
#include "mobiman/geometry/bvh.hpp"
#include "mobiman/geometry/mesh.hpp"
#include "mobiman/geometry/pose.hpp"
#include "mobiman/localization/hal.hpp"

namespace mobiman::sim {

// Ground-truth environment. Sensors see the as-built mesh plus any obstacle
// whose spawn time has passed; localization and planning are only ever given
// the as-planned mesh, so the two may legitimately disagree.
class SimWorld {
 public:
  struct Obstacle {
    geometry::TriangleMesh mesh;
    double spawn_time = 0.0;  // seconds on the simulation clock
  };

  SimWorld() = default;
  SimWorld(geometry::TriangleMesh as_built, geometry::TriangleMesh as_planned,
           std::vector<Obstacle> obstacles = {},
           const Eigen::Vector3d& gravity = Eigen::Vector3d(0, 0, -9.81));

  const geometry::TriangleMesh& as_built() const { return as_built_; }
  const geometry::TriangleMesh& as_planned() const { return as_planned_; }
  const std::vector<Obstacle>& obstacles() const { return obstacles_; }
  const Eigen::Vector3d& gravity() const { return gravity_; }

  // Accelerated view of what the sensors can hit at `time`: the as-built
  // mesh plus live obstacles. Rebuilt lazily when the live set changes.
  const geometry::Bvh& sensed_bvh(double time) const;

  // Throws std::runtime_error when either mesh fails validation.
  void validate() const;

 private:
  geometry::TriangleMesh as_built_;
  geometry::TriangleMesh as_planned_;
  std::vector<Obstacle> obstacles_;
  Eigen::Vector3d gravity_ = Eigen::Vector3d(0, 0, -9.81);

  // Cache of the combined sensed mesh keyed by how many obstacles are live.
  mutable std::unique_ptr<geometry::TriangleMesh> sensed_mesh_;
  mutable std::unique_ptr<geometry::Bvh> sensed_bvh_;
  mutable int sensed_live_count_ = -1;
};

// Ground-truth robot: whole-body configuration, the realized (post-lag)
// actuator rates, sensor mounts, and the drive imperfections. Nothing in
// here may leak to the estimator or controller except through the sensor
// models.
struct SimRobot {
  control::RobotState9 state = control::RobotState9::Zero();
  // Realized input after actuator lag, control layout (v, yaw rate, qdot).
  control::ControlInput9 actuator = control::ControlInput9::Zero();

  geometry::Pose lidar_in_base;  // spinning scanner on the base
  geometry::Pose imu_in_base;
  localization::RangefinderExtrinsics rangefinder_in_ee;

  // First-order actuator time constants, seconds; zero = instantaneous.
  double base_lag = 0.0;
  double arm_lag = 0.0;
  // Ground speed per unit wheel surface speed; 1 = no slip. The wheels (and
  // therefore the encoders) always spin at the actuator rates.
  double wheel_slip = 1.0;

  double wheel_radius = 0.1;  // m
  double track_width = 0.5;   // m

  geometry::Pose base_pose() const { return control::base_pose_of(state); }

  // Throws std::runtime_error on negative lags or a slip factor outside
  // (0, 1].
  void validate() const;
};

// Sensor noise magnitudes and the master seed all per-sensor streams are
// split from. Zero everything for an ideal-sensor world.
struct NoiseConfig {
  double rangefinder_sigma = 0.0;       // m, per ray
  double lidar_sigma = 0.0;             // m, per beam, along the ray
  double gyro_noise_density = 0.0;      // rad/s/sqrt(Hz)
  double accel_noise_density = 0.0;     // m/s^2/sqrt(Hz)
  Eigen::Vector3d gyro_bias = Eigen::Vector3d::Zero();   // rad/s, constant
  Eigen::Vector3d accel_bias = Eigen::Vector3d::Zero();  // m/s^2, constant
  double encoder_sigma = 0.0;           // rad/s, per wheel
  double wheel_slip = 1.0;              // copied onto the robot at load time
  uint64_t seed = 0;

  // Throws std::runtime_error on negative sigmas or slip outside (0, 1].
  void validate() const;
};

// One kinematic integration step of duration dt under `command`. The
// actuator states follow the command with their first-order lag (exact
// interval integral, so coarse steps stay consistent), the base advances
// along a constant-twist arc scaled by the slip factor, and the arm joints
// integrate their realized rates. Deterministic; no noise is injected here.
SimRobot sim_step(const SimWorld& world, const SimRobot& robot,
                  const control::ControlInput9& command, double dt);

}  // namespace mobiman::sim
