#pragma once

#include <string>

#include "mobiman/control/kinematic_model.hpp"
#include "mobiman/localization/hal.hpp"
#include "mobiman/sim/sensors.hpp"
#include "mobiman/sim/world.hpp"

namespace mobiman::sim {

// Everything a closed-loop run needs, assembled from one scenario file. The
// robot carries the true sensor mounts (including any injected calibration
// error); `calibrated_extrinsics` is what the localization stack is told.
struct Scenario {
  std::string name = "scenario";
  uint64_t seed = 0;

  SimWorld world;
  SimRobot robot;
  NoiseConfig noise;
  control::KinematicModel model;
  localization::RangefinderExtrinsics calibrated_extrinsics;
  LidarPattern lidar_pattern;

  double physics_rate = 400.0;  // Hz
  double lidar_rate = 10.0;
  double imu_rate = 200.0;
  double encoder_rate = 100.0;
  double control_rate = 10.0;  // receding-horizon replan rate

  std::string tasks_file;  // absolute path, resolved against the scenario file
  int cycles = 1;
  double task_timeout = 240.0;  // simulated seconds per dot before Failed

  // Throws std::runtime_error on inconsistent rates (each sensor rate must
  // divide the physics rate) or invalid members.
  void validate() const;
};

// Key/value scenario file: room or mesh-file geometry for the as-planned
// model, as-built deviations (floor tilt, wall offsets) or a separate mesh,
// scripted obstacles, robot start and mounts, noise magnitudes, rates, and
// the task file reference. Relative paths resolve against the scenario
// file's directory.
Scenario load_scenario(const std::string& path);

// The three-beam sensor head used when a scenario does not name an
// extrinsics file: ray along the tool axis, ray down at the floor, ray to
// the operator-left wall.
localization::RangefinderExtrinsics default_rangefinder_head();

}  // namespace mobiman::sim
