#include "mobiman/sim/scenario.hpp"

#include <cmath>
#include <filesystem>
#include <stdexcept>

#include "mobiman/common/config.hpp"
#include "mobiman/geometry/mesh_io.hpp"
#include "mobiman/geometry/primitives.hpp"
#include "mobiman/localization/extrinsics_io.hpp"

namespace mobiman::sim {

namespace fs = std::filesystem;

void Scenario::validate() const {
  world.validate();
  robot.validate();
  noise.validate();
  model.validate();
  calibrated_extrinsics.validate();
  lidar_pattern.validate();
  if (!(physics_rate > 0.0)) throw std::runtime_error("physics rate must be positive");
  for (double r : {lidar_rate, imu_rate, encoder_rate, control_rate}) {
    if (!(r > 0.0) || r > physics_rate)
      throw std::runtime_error("sensor rates must lie in (0, physics rate]");
    const double ratio = physics_rate / r;
    if (std::abs(ratio - std::round(ratio)) > 1e-9)
      throw std::runtime_error("sensor rates must divide the physics rate");
  }
  if (cycles < 1) throw std::runtime_error("cycles must be >= 1");
  if (!(task_timeout > 0.0)) throw std::runtime_error("task timeout must be positive");
}

localization::RangefinderExtrinsics default_rangefinder_head() {
  localization::RangefinderExtrinsics ext;
  ext.sensor_in_ee.resize(3);
  // Forward, along the tool axis.
  ext.sensor_in_ee[0] = geometry::Pose(Eigen::Vector3d(0.03, 0.0, 0.0),
                                       Eigen::Quaterniond::Identity());
  // Down at the floor.
  ext.sensor_in_ee[1] = geometry::Pose(
      Eigen::Vector3d(0.0, 0.0, -0.02),
      Eigen::Quaterniond(Eigen::AngleAxisd(M_PI / 2.0, Eigen::Vector3d::UnitY())));
  // Left, at the lateral reference wall.
  ext.sensor_in_ee[2] = geometry::Pose(
      Eigen::Vector3d(0.0, 0.03, 0.0),
      Eigen::Quaterniond(Eigen::AngleAxisd(M_PI / 2.0, Eigen::Vector3d::UnitZ())));
  return ext;
}

namespace {

geometry::RoomSpec room_spec_from(const Config& cfg) {
  geometry::RoomSpec spec;
  spec.width = cfg.get_double("room.width", spec.width);
  spec.depth = cfg.get_double("room.depth", spec.depth);
  spec.height = cfg.get_double("room.height", spec.height);
  spec.wall_yp_yaw_rad = cfg.get_double("room.wall_yp_yaw_deg", 0.0) * M_PI / 180.0;
  spec.wall_xp = cfg.get_bool("room.wall_xp", true);
  spec.wall_xn = cfg.get_bool("room.wall_xn", true);
  spec.wall_yp = cfg.get_bool("room.wall_yp", true);
  spec.wall_yn = cfg.get_bool("room.wall_yn", true);
  spec.ceiling = cfg.get_bool("room.ceiling", true);
  return spec;
}

// As-built deviations are expressed as edits on the as-planned room spec.
geometry::RoomSpec apply_deviations(geometry::RoomSpec spec, const Config& cfg) {
  spec.floor_tilt_rad = cfg.get_double("asbuilt.floor_tilt_deg", 0.0) * M_PI / 180.0;
  spec.wall_offset_xp = cfg.get_double("asbuilt.wall_offset_xp", 0.0);
  spec.wall_offset_xn = cfg.get_double("asbuilt.wall_offset_xn", 0.0);
  spec.wall_offset_yp = cfg.get_double("asbuilt.wall_offset_yp", 0.0);
  spec.wall_offset_yn = cfg.get_double("asbuilt.wall_offset_yn", 0.0);
  return spec;
}

std::string resolve(const fs::path& base_dir, const std::string& p) {
  fs::path q(p);
  return (q.is_absolute() ? q : base_dir / q).string();
}

std::vector<SimWorld::Obstacle> load_obstacles(const Config& cfg, const fs::path& dir) {
  std::vector<SimWorld::Obstacle> out;
  const int n = cfg.group_count("obstacle");
  for (int i = 0; i < n; ++i) {
    const std::string p = "obstacle." + std::to_string(i);
    SimWorld::Obstacle o;
    o.spawn_time = cfg.get_double(p + ".spawn_time", 0.0);
    if (cfg.has(p + ".mesh")) {
      o.mesh = geometry::load_mesh(resolve(dir, cfg.get_string(p + ".mesh")));
    } else if (cfg.has(p + ".panel")) {
      const auto v = cfg.get_doubles(p + ".panel");  // cx cy cz yaw_deg width height
      if (v.size() != 6) throw std::runtime_error("obstacle panel needs 6 numbers");
      o.mesh = geometry::make_panel(Eigen::Vector3d(v[0], v[1], v[2]),
                                    v[3] * M_PI / 180.0, v[4], v[5]);
    } else {
      o.mesh = geometry::make_box(cfg.get_vec3(p + ".center"), cfg.get_vec3(p + ".size"));
    }
    out.push_back(std::move(o));
  }
  return out;
}

geometry::Pose mount_from(const Config& cfg, const std::string& key,
                          const geometry::Pose& fallback) {
  geometry::Pose m = fallback;
  m.position = cfg.get_vec3(key + ".translation", fallback.position);
  if (cfg.has(key + ".quaternion")) m.orientation = cfg.get_quat(key + ".quaternion");
  return m;
}

}  // namespace

Scenario load_scenario(const std::string& path) {
  const Config cfg = Config::from_file(path);
  const fs::path dir = fs::path(path).parent_path();

  Scenario s;
  s.name = cfg.get_string("name", fs::path(path).stem().string());
  s.seed = static_cast<uint64_t>(cfg.get_int("seed", 0));

  // Geometry: explicit mesh files win; otherwise a parametric room, with
  // the as-built copy carrying the scripted deviations.
  geometry::TriangleMesh as_planned, as_built;
  if (cfg.has("mesh.as_planned")) {
    as_planned = geometry::load_mesh(resolve(dir, cfg.get_string("mesh.as_planned")));
  } else {
    as_planned = geometry::make_room(room_spec_from(cfg), "model");
  }
  if (cfg.has("mesh.as_built")) {
    as_built = geometry::load_mesh(resolve(dir, cfg.get_string("mesh.as_built")));
  } else {
    as_built = geometry::make_room(apply_deviations(room_spec_from(cfg), cfg), "model");
  }
  s.world = SimWorld(std::move(as_built), std::move(as_planned),
                     load_obstacles(cfg, dir),
                     cfg.get_vec3("gravity", Eigen::Vector3d(0, 0, -9.81)));

  s.model = cfg.has("robot.model_file")
                ? control::load_kinematic_model(resolve(dir, cfg.get_string("robot.model_file")))
                : control::default_arm_model();

  const auto start = cfg.get_doubles("robot.start");  // x y theta
  if (start.size() != 3) throw std::runtime_error("robot.start needs x y theta");
  s.robot.state = s.model.default_state();
  s.robot.state[0] = start[0];
  s.robot.state[1] = start[1];
  s.robot.state[2] = start[2];
  s.robot.base_lag = cfg.get_double("robot.base_lag", 0.05);
  s.robot.arm_lag = cfg.get_double("robot.arm_lag", 0.03);
  s.robot.wheel_radius = cfg.get_double("robot.wheel_radius", 0.1);
  s.robot.track_width = cfg.get_double("robot.track_width", 0.5);
  s.robot.lidar_in_base = mount_from(
      cfg, "robot.lidar_mount",
      geometry::Pose(Eigen::Vector3d(0.0, 0.0, 0.45), Eigen::Quaterniond::Identity()));
  s.robot.imu_in_base = mount_from(
      cfg, "robot.imu_mount",
      geometry::Pose(Eigen::Vector3d(0.08, 0.0, 0.2), Eigen::Quaterniond::Identity()));

  s.calibrated_extrinsics =
      cfg.has("robot.extrinsics_file")
          ? localization::load_extrinsics(resolve(dir, cfg.get_string("robot.extrinsics_file")))
          : default_rangefinder_head();

  // The robot carries what the hardware actually does: the calibrated head
  // perturbed by any injected mounting error (a yaw of the whole head about
  // the tool z axis, the classic lateral-reference failure mode).
  s.robot.rangefinder_in_ee = s.calibrated_extrinsics;
  const double ext_err =
      cfg.get_double("hal.extrinsic_error_deg", 0.0) * M_PI / 180.0;
  if (ext_err != 0.0) {
    const Eigen::Quaterniond tilt(Eigen::AngleAxisd(ext_err, Eigen::Vector3d::UnitZ()));
    for (auto& sensor : s.robot.rangefinder_in_ee.sensor_in_ee)
      sensor.orientation = tilt * sensor.orientation;
  }

  s.noise.rangefinder_sigma = cfg.get_double("noise.rangefinder_sigma", 0.0);
  s.noise.lidar_sigma = cfg.get_double("noise.lidar_sigma", 0.0);
  s.noise.gyro_noise_density = cfg.get_double("noise.gyro_density", 0.0);
  s.noise.accel_noise_density = cfg.get_double("noise.accel_density", 0.0);
  s.noise.gyro_bias = cfg.get_vec3("noise.gyro_bias", Eigen::Vector3d::Zero());
  s.noise.accel_bias = cfg.get_vec3("noise.accel_bias", Eigen::Vector3d::Zero());
  s.noise.encoder_sigma = cfg.get_double("noise.encoder_sigma", 0.0);
  s.noise.wheel_slip = cfg.get_double("noise.wheel_slip", 1.0);
  s.noise.seed = s.seed;
  s.robot.wheel_slip = s.noise.wheel_slip;

  s.lidar_pattern.rings = cfg.get_int("lidar.rings", 16);
  s.lidar_pattern.vertical_min = cfg.get_double("lidar.vertical_min_deg", -15.0) * M_PI / 180.0;
  s.lidar_pattern.vertical_max = cfg.get_double("lidar.vertical_max_deg", 15.0) * M_PI / 180.0;
  s.lidar_pattern.azimuth_steps = cfg.get_int("lidar.azimuth_steps", 240);
  s.lidar_pattern.max_range = cfg.get_double("lidar.max_range", 30.0);

  s.physics_rate = cfg.get_double("rates.physics", 400.0);
  s.lidar_rate = cfg.get_double("rates.lidar", 10.0);
  s.imu_rate = cfg.get_double("rates.imu", 200.0);
  s.encoder_rate = cfg.get_double("rates.encoders", 100.0);
  s.control_rate = cfg.get_double("rates.control", 10.0);

  if (cfg.has("tasks.file")) s.tasks_file = resolve(dir, cfg.get_string("tasks.file"));
  s.cycles = cfg.get_int("cycles", 1);
  s.task_timeout = cfg.get_double("task_timeout", 240.0);

  s.validate();
  return s;
}

}  // namespace mobiman::sim
