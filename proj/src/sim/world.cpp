#include "mobiman/sim/world.hpp"

#include <cmath>
#include <stdexcept>

namespace mobiman::sim {

SimWorld::SimWorld(geometry::TriangleMesh as_built, geometry::TriangleMesh as_planned,
                   std::vector<Obstacle> obstacles, const Eigen::Vector3d& gravity)
    : as_built_(std::move(as_built)),
      as_planned_(std::move(as_planned)),
      obstacles_(std::move(obstacles)),
      gravity_(gravity) {
  validate();
}

void SimWorld::validate() const {
  as_built_.validate();
  as_planned_.validate();
  for (const Obstacle& o : obstacles_) o.mesh.validate();
}

const geometry::Bvh& SimWorld::sensed_bvh(double time) const {
  int live = 0;
  for (const Obstacle& o : obstacles_)
    if (o.spawn_time <= time) ++live;
  if (live != sensed_live_count_) {
    auto combined = std::make_unique<geometry::TriangleMesh>(as_built_);
    for (const Obstacle& o : obstacles_)
      if (o.spawn_time <= time) combined->append(o.mesh);
    sensed_mesh_ = std::move(combined);
    sensed_bvh_ = std::make_unique<geometry::Bvh>(*sensed_mesh_);
    sensed_live_count_ = live;
  }
  return *sensed_bvh_;
}

void SimRobot::validate() const {
  if (base_lag < 0.0 || arm_lag < 0.0)
    throw std::runtime_error("actuator lag must be >= 0");
  if (!(wheel_slip > 0.0) || wheel_slip > 1.0)
    throw std::runtime_error("wheel slip factor must be in (0, 1]");
  if (!(wheel_radius > 0.0) || !(track_width > 0.0))
    throw std::runtime_error("wheel geometry must be positive");
}

void NoiseConfig::validate() const {
  if (rangefinder_sigma < 0.0 || lidar_sigma < 0.0 || gyro_noise_density < 0.0 ||
      accel_noise_density < 0.0 || encoder_sigma < 0.0)
    throw std::runtime_error("noise sigmas must be >= 0");
  if (!(wheel_slip > 0.0) || wheel_slip > 1.0)
    throw std::runtime_error("wheel slip factor must be in (0, 1]");
}

namespace {

// Advances a first-order actuator channel toward `target` over dt and
// returns the exact integral of the channel over the interval, so position
// updates stay consistent at any step size.
double lag_channel(double& value, double target, double lag, double dt) {
  if (lag <= 0.0) {
    value = target;
    return target * dt;
  }
  const double decay = std::exp(-dt / lag);
  const double offset = value - target;
  value = target + offset * decay;
  return target * dt + offset * lag * (1.0 - decay);
}

}  // namespace

SimRobot sim_step(const SimWorld& world, const SimRobot& robot,
                  const control::ControlInput9& command, double dt) {
  (void)world;  // contacts and dynamics are out of scope
  if (!(dt > 0.0)) throw std::runtime_error("sim_step requires dt > 0");
  robot.validate();

  SimRobot next = robot;

  const double ds_wheel = lag_channel(next.actuator[0], command[0], robot.base_lag, dt);
  const double dtheta_wheel =
      lag_channel(next.actuator[1], command[1], robot.base_lag, dt);
  next.actuator[2] = 0.0;  // padding channel, never realized

  // The tires shed the slip fraction of their surface speed uniformly, so
  // the executed arc is the commanded one scaled toward the ground.
  const double ds = robot.wheel_slip * ds_wheel;
  const double dtheta = robot.wheel_slip * dtheta_wheel;

  double dx, dy;
  if (std::abs(dtheta) < 1e-10) {
    dx = ds;
    dy = 0.5 * ds * dtheta;
  } else {
    const double radius = ds / dtheta;
    dx = radius * std::sin(dtheta);
    dy = radius * (1.0 - std::cos(dtheta));
  }
  const double c = std::cos(robot.state[2]);
  const double s = std::sin(robot.state[2]);
  next.state[0] += c * dx - s * dy;
  next.state[1] += s * dx + c * dy;
  next.state[2] += dtheta;

  for (int i = 0; i < 6; ++i)
    next.state[3 + i] +=
        lag_channel(next.actuator[3 + i], command[3 + i], robot.arm_lag, dt);

  return next;
}

}  // namespace mobiman::sim
