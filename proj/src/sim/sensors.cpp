#include "mobiman/sim/sensors.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "mobiman/common/rng.hpp"
#include "mobiman/control/wheel_controller.hpp"
#include "mobiman/geometry/so3.hpp"

namespace mobiman::sim {

void LidarPattern::validate() const {
  if (rings < 1 || azimuth_steps < 1)
    throw std::runtime_error("lidar pattern needs at least one ring and azimuth step");
  if (!(vertical_min <= vertical_max))
    throw std::runtime_error("lidar elevation interval is inverted");
  if (!(max_range > 0.0)) throw std::runtime_error("lidar max range must be positive");
}

geometry::SurfacePointCloud simulate_lidar(const SimWorld& world,
                                           const geometry::Pose& sensor_pose,
                                           const LidarPattern& pattern,
                                           const NoiseConfig& noise, uint64_t seed,
                                           double time) {
  pattern.validate();
  noise.validate();
  const geometry::Bvh& bvh = world.sensed_bvh(time);
  Rng rng(seed);

  geometry::SurfacePointCloud cloud;
  cloud.frame = "lidar";
  cloud.points.reserve(static_cast<size_t>(pattern.rings) * pattern.azimuth_steps);
  cloud.normals.reserve(cloud.points.capacity());

  const Eigen::Quaterniond world_from_sensor = sensor_pose.orientation;
  const Eigen::Quaterniond sensor_from_world = world_from_sensor.conjugate();

  for (int r = 0; r < pattern.rings; ++r) {
    const double elevation =
        pattern.rings == 1
            ? 0.5 * (pattern.vertical_min + pattern.vertical_max)
            : pattern.vertical_min + (pattern.vertical_max - pattern.vertical_min) * r /
                                         (pattern.rings - 1);
    const double ce = std::cos(elevation);
    const double se = std::sin(elevation);
    for (int a = 0; a < pattern.azimuth_steps; ++a) {
      const double azimuth = 2.0 * M_PI * a / pattern.azimuth_steps;
      const Eigen::Vector3d dir_sensor(ce * std::cos(azimuth), ce * std::sin(azimuth), se);
      const geometry::Ray ray(sensor_pose.position, world_from_sensor * dir_sensor);
      const auto hit = bvh.raytrace(ray, pattern.max_range);
      if (!hit) continue;
      double range = hit->distance;
      if (noise.lidar_sigma > 0.0) range += rng.normal(0.0, noise.lidar_sigma);
      if (range <= 1e-6) continue;
      cloud.points.push_back(range * dir_sensor);
      cloud.normals.push_back(sensor_from_world * hit->plane_normal);
    }
  }
  return cloud;
}

std::optional<double> simulate_rangefinder(const SimWorld& world,
                                           const geometry::Pose& sensor_pose,
                                           const NoiseConfig& noise, uint64_t seed,
                                           double max_range, double time) {
  noise.validate();
  const geometry::Ray ray(sensor_pose.position,
                          sensor_pose.orientation * Eigen::Vector3d::UnitX());
  const auto hit = world.sensed_bvh(time).raytrace(ray, max_range);
  if (!hit) return std::nullopt;
  double d = hit->distance;
  if (noise.rangefinder_sigma > 0.0) d += Rng(seed).normal(0.0, noise.rangefinder_sigma);
  return std::max(d, 1e-6);
}

std::vector<estimation::Measurement> simulate_imu(const std::vector<PoseSample>& base_trace,
                                                  const geometry::Pose& imu_in_base,
                                                  const Eigen::Vector3d& gravity,
                                                  double rate, const NoiseConfig& noise,
                                                  uint64_t seed) {
  noise.validate();
  if (!(rate > 0.0)) throw std::runtime_error("imu rate must be positive");
  if (base_trace.size() < 3)
    throw std::runtime_error("imu simulation needs at least three trajectory samples");
  for (size_t k = 1; k < base_trace.size(); ++k)
    if (!(base_trace[k].t > base_trace[k - 1].t))
      throw std::runtime_error("imu trajectory timestamps must increase");

  std::vector<geometry::Pose> sensor(base_trace.size());
  for (size_t k = 0; k < base_trace.size(); ++k)
    sensor[k] = base_trace[k].pose * imu_in_base;

  Rng rng(seed);
  const double sigma_g = noise.gyro_noise_density * std::sqrt(rate);
  const double sigma_a = noise.accel_noise_density * std::sqrt(rate);

  std::vector<estimation::Measurement> out;
  // Emit on the rate grid anchored at the first sample; interior samples
  // only, since the differences need a neighbor on each side.
  double next_emit = base_trace.front().t + 1.0 / rate;
  for (size_t k = 1; k + 1 < base_trace.size(); ++k) {
    if (base_trace[k].t + 1e-9 < next_emit) continue;
    next_emit += 1.0 / rate;

    const double h1 = base_trace[k].t - base_trace[k - 1].t;
    const double h2 = base_trace[k + 1].t - base_trace[k].t;

    // Body-frame angular velocity across the bracket.
    const Eigen::Matrix3d rel = (sensor[k - 1].orientation.conjugate() *
                                 sensor[k + 1].orientation)
                                    .toRotationMatrix();
    const Eigen::Vector3d omega = geometry::log_so3(rel) / (h1 + h2);

    // Three-point second difference tolerates mildly uneven spacing.
    const Eigen::Vector3d accel_world =
        2.0 * (sensor[k - 1].position / (h1 * (h1 + h2)) -
               sensor[k].position / (h1 * h2) +
               sensor[k + 1].position / (h2 * (h1 + h2)));
    const Eigen::Vector3d specific_force =
        sensor[k].orientation.conjugate() * (accel_world - gravity);

    estimation::Measurement m;
    m.timestamp = base_trace[k].t;
    m.kind = estimation::MeasurementKind::kImu;
    m.angular_velocity = omega + noise.gyro_bias;
    m.specific_force = specific_force + noise.accel_bias;
    for (int i = 0; i < 3; ++i) {
      if (sigma_g > 0.0) m.angular_velocity[i] += rng.normal(0.0, sigma_g);
      if (sigma_a > 0.0) m.specific_force[i] += rng.normal(0.0, sigma_a);
    }
    out.push_back(m);
  }
  return out;
}

estimation::Measurement simulate_encoders(const SimRobot& robot, double timestamp,
                                          const NoiseConfig& noise, uint64_t seed) {
  noise.validate();
  robot.validate();
  // The encoders sit on the wheels, upstream of the tire/ground slip, so
  // they report the actuator twist regardless of what the base realized.
  const control::WheelSpeeds ws = control::base_velocity_to_wheels(
      robot.actuator[0], robot.actuator[1], robot.wheel_radius, robot.track_width);

  estimation::Measurement m;
  m.timestamp = timestamp;
  m.kind = estimation::MeasurementKind::kWheelOdometry;
  m.wheel_left = ws.left;
  m.wheel_right = ws.right;
  if (noise.encoder_sigma > 0.0) {
    Rng rng(seed);
    m.wheel_left += rng.normal(0.0, noise.encoder_sigma);
    m.wheel_right += rng.normal(0.0, noise.encoder_sigma);
  }
  return m;
}

}  // namespace mobiman::sim
