#include "mobiman/estimation/measurement_log.hpp"

#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace mobiman::estimation {

namespace {

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

void write_measurement_log(const std::string& path,
                           const std::vector<Measurement>& measurements) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("measurement log: cannot open " + path);
  for (const auto& m : measurements) {
    out << fmt(m.timestamp) << ' ';
    switch (m.kind) {
      case MeasurementKind::kPoseUpdate:
        out << "pose_update " << fmt(m.pose.position.x()) << ' ' << fmt(m.pose.position.y())
            << ' ' << fmt(m.pose.position.z()) << ' ' << fmt(m.pose.orientation.w()) << ' '
            << fmt(m.pose.orientation.x()) << ' ' << fmt(m.pose.orientation.y()) << ' '
            << fmt(m.pose.orientation.z());
        break;
      case MeasurementKind::kWheelOdometry:
        out << "wheel_odometry " << fmt(m.wheel_left) << ' ' << fmt(m.wheel_right);
        break;
      case MeasurementKind::kImu:
        out << "imu " << fmt(m.angular_velocity.x()) << ' ' << fmt(m.angular_velocity.y())
            << ' ' << fmt(m.angular_velocity.z()) << ' ' << fmt(m.specific_force.x()) << ' '
            << fmt(m.specific_force.y()) << ' ' << fmt(m.specific_force.z());
        break;
    }
    for (double s : m.noise) out << ' ' << fmt(s);
    out << '\n';
  }
}

std::vector<Measurement> read_measurement_log(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("measurement log: cannot open " + path);
  std::vector<Measurement> measurements;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ss(line);
    Measurement m;
    std::string kind;
    if (!(ss >> m.timestamp >> kind))
      throw std::runtime_error("measurement log: malformed line " + std::to_string(line_no));
    std::vector<double> v;
    double x;
    while (ss >> x) v.push_back(x);
    if (kind == "pose_update") {
      if (v.size() != 7 && v.size() != 9)
        throw std::runtime_error("measurement log: bad pose_update on line " +
                                 std::to_string(line_no));
      m.kind = MeasurementKind::kPoseUpdate;
      m.pose.position = Eigen::Vector3d(v[0], v[1], v[2]);
      m.pose.orientation = Eigen::Quaterniond(v[3], v[4], v[5], v[6]);
      if (v.size() == 9) m.noise = {v[7], v[8]};
    } else if (kind == "wheel_odometry") {
      if (v.size() != 2)
        throw std::runtime_error("measurement log: bad wheel_odometry on line " +
                                 std::to_string(line_no));
      m.kind = MeasurementKind::kWheelOdometry;
      m.wheel_left = v[0];
      m.wheel_right = v[1];
    } else if (kind == "imu") {
      if (v.size() != 6)
        throw std::runtime_error("measurement log: bad imu on line " + std::to_string(line_no));
      m.kind = MeasurementKind::kImu;
      m.angular_velocity = Eigen::Vector3d(v[0], v[1], v[2]);
      m.specific_force = Eigen::Vector3d(v[3], v[4], v[5]);
    } else {
      throw std::runtime_error("measurement log: unknown kind '" + kind + "' on line " +
                               std::to_string(line_no));
    }
    measurements.push_back(m);
  }
  return measurements;
}

}  // namespace mobiman::estimation
