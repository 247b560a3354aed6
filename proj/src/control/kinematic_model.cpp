#include "mobiman/control/kinematic_model.hpp"

#include <stdexcept>

#include "mobiman/common/config.hpp"
#include "mobiman/geometry/so3.hpp"

namespace mobiman::control {

ControlInput9 KinematicModel::input_limits() const {
  // Slot 2 pads the input to state width; the plant ignores it and the zero
  // limit pins it. Joint rates live in the tail, mirroring the state layout.
  ControlInput9 lim = ControlInput9::Zero();
  lim[0] = base_velocity_limit;
  lim[1] = base_yaw_rate_limit;
  for (int i = 0; i < 6; ++i) lim[3 + i] = joints[i].velocity_limit;
  return lim;
}

RobotState9 KinematicModel::default_state() const {
  RobotState9 x = RobotState9::Zero();
  x.tail<6>() = default_arm;
  return x;
}

void KinematicModel::validate() const {
  for (const Joint& j : joints) {
    if (std::abs(j.axis.norm() - 1.0) > 1e-9)
      throw std::runtime_error("joint axis must be unit length");
    if (!(j.limit_lower < j.limit_upper))
      throw std::runtime_error("joint limits must satisfy lower < upper");
    if (!(j.velocity_limit > 0.0))
      throw std::runtime_error("joint velocity limit must be positive");
  }
  if (!(base_velocity_limit > 0.0) || !(base_yaw_rate_limit > 0.0))
    throw std::runtime_error("base velocity limits must be positive");
}

geometry::Pose forward_kinematics(const KinematicModel& model, const RobotState9& x) {
  geometry::Pose t = base_pose_of(x) * model.mount;
  for (int i = 0; i < 6; ++i) {
    const KinematicModel::Joint& j = model.joints[i];
    t = t * j.fixed *
        geometry::Pose(Eigen::Vector3d::Zero(),
                       Eigen::Quaterniond(Eigen::AngleAxisd(x[3 + i], j.axis)));
  }
  return t * model.ee_offset;
}

Eigen::Matrix<double, 6, 9> ee_jacobian(const KinematicModel& model,
                                        const RobotState9& x) {
  // One pass records each joint's world-frame origin and rotation axis.
  std::array<Eigen::Vector3d, 6> origin, axis;
  geometry::Pose t = base_pose_of(x) * model.mount;
  for (int i = 0; i < 6; ++i) {
    const KinematicModel::Joint& j = model.joints[i];
    t = t * j.fixed;
    origin[i] = t.position;
    axis[i] = t.orientation * j.axis;
    t = t * geometry::Pose(Eigen::Vector3d::Zero(),
                           Eigen::Quaterniond(Eigen::AngleAxisd(x[3 + i], j.axis)));
  }
  const Eigen::Vector3d p_ee = (t * model.ee_offset).position;

  Eigen::Matrix<double, 6, 9> J = Eigen::Matrix<double, 6, 9>::Zero();
  J(0, 0) = 1.0;
  J(1, 1) = 1.0;
  const Eigen::Vector3d z = Eigen::Vector3d::UnitZ();
  J.block<3, 1>(0, 2) = z.cross(p_ee - Eigen::Vector3d(x[0], x[1], 0.0));
  J.block<3, 1>(3, 2) = z;
  for (int i = 0; i < 6; ++i) {
    J.block<3, 1>(0, 3 + i) = axis[i].cross(p_ee - origin[i]);
    J.block<3, 1>(3, 3 + i) = axis[i];
  }
  return J;
}

KinematicModel default_arm_model() {
  KinematicModel m;
  m.mount = geometry::Pose(Eigen::Vector3d(0.25, 0.0, 0.55),
                           Eigen::Quaterniond::Identity());

  auto pitch = [](double x, double z) {
    return KinematicModel::Joint{
        geometry::Pose(Eigen::Vector3d(x, 0.0, z), Eigen::Quaterniond::Identity()),
        Eigen::Vector3d::UnitY(), -2.4, 2.4, 0.8};
  };
  // Yaw shoulder, two pitch links, yaw elbow roll, pitch wrist, roll flange.
  m.joints[0] = {geometry::Pose(), Eigen::Vector3d::UnitZ(), -2.8, 2.8, 0.8};
  m.joints[1] = pitch(0.0, 0.12);
  m.joints[2] = pitch(0.0, 0.40);
  m.joints[3] = {geometry::Pose(Eigen::Vector3d(0.0, 0.0, 0.32),
                                Eigen::Quaterniond::Identity()),
                 Eigen::Vector3d::UnitZ(), -2.8, 2.8, 1.0};
  m.joints[4] = pitch(0.0, 0.10);
  m.joints[5] = {geometry::Pose(Eigen::Vector3d(0.0, 0.0, 0.08),
                                Eigen::Quaterniond::Identity()),
                 Eigen::Vector3d::UnitZ(), -2.8, 2.8, 1.0};
  m.ee_offset = geometry::Pose(Eigen::Vector3d(0.0, 0.0, 0.12),
                               Eigen::Quaterniond::Identity());
  // Forward-reaching work posture: tool roughly horizontal about a meter
  // ahead of the base center, with margin left in every joint range.
  m.default_arm << 0.0, 0.2, 1.2, 0.0, 0.17, 0.0;
  m.validate();
  return m;
}

KinematicModel load_kinematic_model(const std::string& path) {
  const Config cfg = Config::from_file(path);
  KinematicModel m;
  m.mount = geometry::Pose(cfg.get_vec3("mount.translation"),
                           cfg.get_quat("mount.quaternion"));
  if (cfg.group_count("joint") != 6)
    throw std::runtime_error("kinematic model must define exactly 6 joints");
  for (int i = 0; i < 6; ++i) {
    const std::string p = "joint." + std::to_string(i) + ".";
    KinematicModel::Joint& j = m.joints[i];
    j.fixed = geometry::Pose(cfg.get_vec3(p + "translation"),
                             cfg.get_quat(p + "quaternion"));
    j.axis = cfg.get_vec3(p + "axis");
    j.limit_lower = cfg.get_double(p + "limit_lower");
    j.limit_upper = cfg.get_double(p + "limit_upper");
    j.velocity_limit = cfg.get_double(p + "velocity_limit");
  }
  m.ee_offset = geometry::Pose(cfg.get_vec3("ee.translation"),
                               cfg.get_quat("ee.quaternion"));
  const std::vector<double> d = cfg.get_doubles("default_arm");
  if (d.size() != 6) throw std::runtime_error("default_arm must have 6 entries");
  for (int i = 0; i < 6; ++i) m.default_arm[i] = d[i];
  m.base_velocity_limit = cfg.get_double("base.velocity_limit");
  m.base_yaw_rate_limit = cfg.get_double("base.yaw_rate_limit");
  m.validate();
  return m;
}

void save_kinematic_model(const std::string& path, const KinematicModel& m) {
  m.validate();
  Config cfg;
  auto put_pose = [&](const std::string& key, const geometry::Pose& p) {
    cfg.set_vec(key + ".translation",
                {p.position.x(), p.position.y(), p.position.z()});
    cfg.set_vec(key + ".quaternion", {p.orientation.w(), p.orientation.x(),
                                      p.orientation.y(), p.orientation.z()});
  };
  put_pose("mount", m.mount);
  for (int i = 0; i < 6; ++i) {
    const std::string p = "joint." + std::to_string(i);
    put_pose(p, m.joints[i].fixed);
    cfg.set_vec(p + ".axis",
                {m.joints[i].axis.x(), m.joints[i].axis.y(), m.joints[i].axis.z()});
    cfg.set_double(p + ".limit_lower", m.joints[i].limit_lower);
    cfg.set_double(p + ".limit_upper", m.joints[i].limit_upper);
    cfg.set_double(p + ".velocity_limit", m.joints[i].velocity_limit);
  }
  put_pose("ee", m.ee_offset);
  cfg.set_vec("default_arm", {m.default_arm[0], m.default_arm[1], m.default_arm[2],
                              m.default_arm[3], m.default_arm[4], m.default_arm[5]});
  cfg.set_double("base.velocity_limit", m.base_velocity_limit);
  cfg.set_double("base.yaw_rate_limit", m.base_yaw_rate_limit);
  cfg.save(path);
}

}  // namespace mobiman::control
