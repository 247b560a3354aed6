#include "mobiman/estimation/error_terms.hpp"

#include <stdexcept>

#include "mobiman/estimation/differential_drive.hpp"
#include "mobiman/geometry/so3.hpp"

namespace mobiman::estimation {

using geometry::left_jacobian_inv_so3;
using geometry::right_jacobian_inv_so3;
using geometry::right_jacobian_so3;
using geometry::skew;

namespace {

Eigen::Vector3d quat_log_vec(const Eigen::Quaterniond& q) {
  return geometry::quat_log(q);
}

void check_knot(const EstimatorState& st, int k, int span) {
  if (k < 0 || k + span >= static_cast<int>(st.knots.size()))
    throw std::runtime_error("error term: knot index outside window");
}

}  // namespace

EvaluatedTerm pose_update_term(const EstimatorState& st, int k, const Measurement& z,
                               const MheConfig& cfg) {
  check_knot(st, k, 0);
  const double sp = z.noise.size() >= 2 ? z.noise[0] : cfg.icp_sigma_pos;
  const double sr = z.noise.size() >= 2 ? z.noise[1] : cfg.icp_sigma_rot;

  const geometry::Pose& x = st.knots[k].pose;
  const Eigen::Vector3d phi = quat_log_vec(z.pose.orientation * x.orientation.inverse());

  EvaluatedTerm term;
  term.error.resize(6);
  term.error.head<3>() = (z.pose.position - x.position) / sp;
  term.error.tail<3>() = phi / sr;

  term.jacobian = Eigen::MatrixXd::Zero(6, st.dim());
  const int o = 9 * k;
  term.jacobian.block<3, 3>(0, o) = -Eigen::Matrix3d::Identity() / sp;
  // E(d) = z.q (exp(d) x.q)^-1 = E exp(-d).
  term.jacobian.block<3, 3>(3, o + 3) = -right_jacobian_inv_so3(phi) / sr;
  return term;
}

EvaluatedTerm odometry_term(const EstimatorState& st, int k, double wheel_left,
                            double wheel_right, bool stationary, const MheConfig& cfg) {
  check_knot(st, k, 1);
  const double sigma = stationary ? cfg.odom_sigma_stationary : cfg.odom_sigma_moving;
  const double dt = st.knots[k + 1].timestamp - st.knots[k].timestamp;

  const geometry::Pose& xa = st.knots[k].pose;
  const geometry::Pose& xb = st.knots[k + 1].pose;
  const geometry::Pose pred = differential_drive_predict(
      xa, wheel_left, wheel_right, cfg.wheel_radius, cfg.track_width, dt);

  // Local arc displacement in the k-frame; rotated copy appears in the
  // position residual Jacobian.
  const Eigen::Vector3d Ru = pred.position - xa.position;
  const Eigen::Vector3d phi = quat_log_vec(xb.orientation * pred.orientation.inverse());

  EvaluatedTerm term;
  term.error.resize(6);
  term.error.head<3>() = (xb.position - pred.position) / sigma;
  term.error.tail<3>() = phi / sigma;

  term.jacobian = Eigen::MatrixXd::Zero(6, st.dim());
  const int oa = 9 * k;
  const int ob = 9 * (k + 1);
  term.jacobian.block<3, 3>(0, ob) = Eigen::Matrix3d::Identity() / sigma;
  term.jacobian.block<3, 3>(0, oa) = -Eigen::Matrix3d::Identity() / sigma;
  term.jacobian.block<3, 3>(0, oa + 3) = skew(Ru) / sigma;
  // E(d_b) = exp(d) E ; E(d_a) = E exp(-d).
  term.jacobian.block<3, 3>(3, ob + 3) = left_jacobian_inv_so3(phi) / sigma;
  term.jacobian.block<3, 3>(3, oa + 3) = -right_jacobian_inv_so3(phi) / sigma;
  return term;
}

EvaluatedTerm imu_term(const EstimatorState& st, int k, const ImuPreintegration& preint,
                       const MheConfig& cfg) {
  check_knot(st, k, 1);
  const double dt = preint.dt_total();
  const double sR = cfg.gyro_noise * std::sqrt(dt);
  const double sv = cfg.accel_noise * std::sqrt(dt);
  const double sp = cfg.accel_noise * std::sqrt(dt) * dt;

  const Eigen::Matrix3d Rk = st.knots[k].pose.orientation.toRotationMatrix();
  const Eigen::Matrix3d Rj = st.knots[k + 1].pose.orientation.toRotationMatrix();
  const Eigen::Vector3d& pk = st.knots[k].pose.position;
  const Eigen::Vector3d& pj = st.knots[k + 1].pose.position;
  const Eigen::Vector3d& vk = st.knots[k].velocity;
  const Eigen::Vector3d& vj = st.knots[k + 1].velocity;
  const Eigen::Vector3d& g = cfg.gravity;

  const Eigen::Vector3d b = st.gyro_bias - preint.gyro_bias_lin();
  const Eigen::Vector3d c = st.accel_bias - preint.accel_bias_lin();

  // Bias-corrected preintegrated rotation A = dR * Exp(JRg b).
  const Eigen::Vector3d u = preint.dR_dbg() * b;
  const Eigen::Matrix3d A = preint.delta_R() * geometry::exp_so3(u);
  const Eigen::Matrix3d C = preint.delta_R().transpose() * Rk.transpose() * Rj;

  const Eigen::Vector3d phi = geometry::log_so3(A.transpose() * Rk.transpose() * Rj);
  const Eigen::Vector3d wv = vj - vk - g * dt;
  const Eigen::Vector3d wp = pj - pk - vk * dt - 0.5 * g * dt * dt;
  const Eigen::Vector3d ev = Rk.transpose() * wv - (preint.delta_v() + preint.dv_dbg() * b +
                                                    preint.dv_dba() * c);
  const Eigen::Vector3d ep = Rk.transpose() * wp - (preint.delta_p() + preint.dp_dbg() * b +
                                                    preint.dp_dba() * c);

  EvaluatedTerm term;
  term.error.resize(9);
  term.error.segment<3>(0) = phi / sR;
  term.error.segment<3>(3) = ev / sv;
  term.error.segment<3>(6) = ep / sp;

  term.jacobian = Eigen::MatrixXd::Zero(9, st.dim());
  const int oa = 9 * k;
  const int ob = 9 * (k + 1);
  const int os = 9 * static_cast<int>(st.knots.size());

  const Eigen::Matrix3d Jl_inv = left_jacobian_inv_so3(phi);
  const Eigen::Matrix3d AtRkt = A.transpose() * Rk.transpose();
  // Rotation rows.
  term.jacobian.block<3, 3>(0, ob + 3) = Jl_inv * AtRkt / sR;
  term.jacobian.block<3, 3>(0, oa + 3) = -Jl_inv * AtRkt / sR;
  term.jacobian.block<3, 3>(0, os) = -right_jacobian_inv_so3(phi) * C.transpose() *
                                     right_jacobian_so3(-u) * preint.dR_dbg() / sR;
  // Velocity rows.
  term.jacobian.block<3, 3>(3, ob + 6) = Rk.transpose() / sv;
  term.jacobian.block<3, 3>(3, oa + 6) = -Rk.transpose() / sv;
  term.jacobian.block<3, 3>(3, oa + 3) = Rk.transpose() * skew(wv) / sv;
  term.jacobian.block<3, 3>(3, os) = -preint.dv_dbg() / sv;
  term.jacobian.block<3, 3>(3, os + 3) = -preint.dv_dba() / sv;
  // Position rows.
  term.jacobian.block<3, 3>(6, ob) = Rk.transpose() / sp;
  term.jacobian.block<3, 3>(6, oa) = -Rk.transpose() / sp;
  term.jacobian.block<3, 3>(6, oa + 6) = -Rk.transpose() * dt / sp;
  term.jacobian.block<3, 3>(6, oa + 3) = Rk.transpose() * skew(wp) / sp;
  term.jacobian.block<3, 3>(6, os) = -preint.dp_dbg() / sp;
  term.jacobian.block<3, 3>(6, os + 3) = -preint.dp_dba() / sp;
  return term;
}

EvaluatedTerm prior_term(const EstimatorState& st, const PriorInfo& prior,
                         const MheConfig& cfg) {
  if (st.knots.empty()) throw std::runtime_error("prior term: empty window");
  const geometry::Pose& x = st.knots[0].pose;
  const Eigen::Vector3d phi = quat_log_vec(x.orientation * prior.knot.pose.orientation.inverse());

  EvaluatedTerm term;
  term.error.resize(15);
  term.error.segment<3>(0) = (x.position - prior.knot.pose.position) / cfg.prior_sigma_pos;
  term.error.segment<3>(3) = phi / cfg.prior_sigma_rot;
  term.error.segment<3>(6) = (st.knots[0].velocity - prior.knot.velocity) / cfg.prior_sigma_vel;
  term.error.segment<3>(9) = (st.gyro_bias - prior.gyro_bias) / cfg.gyro_bias_sigma;
  term.error.segment<3>(12) = (st.accel_bias - prior.accel_bias) / cfg.accel_bias_sigma;

  term.jacobian = Eigen::MatrixXd::Zero(15, st.dim());
  const int os = 9 * static_cast<int>(st.knots.size());
  term.jacobian.block<3, 3>(0, 0) = Eigen::Matrix3d::Identity() / cfg.prior_sigma_pos;
  // E(d) = exp(d) E.
  term.jacobian.block<3, 3>(3, 3) = left_jacobian_inv_so3(phi) / cfg.prior_sigma_rot;
  term.jacobian.block<3, 3>(6, 6) = Eigen::Matrix3d::Identity() / cfg.prior_sigma_vel;
  term.jacobian.block<3, 3>(9, os) = Eigen::Matrix3d::Identity() / cfg.gyro_bias_sigma;
  term.jacobian.block<3, 3>(12, os + 3) = Eigen::Matrix3d::Identity() / cfg.accel_bias_sigma;
  return term;
}

namespace {

int nearest_knot(const EstimatorState& st, double t, double spacing) {
  int best = -1;
  double best_dt = 0.51 * spacing;
  for (size_t i = 0; i < st.knots.size(); ++i) {
    const double dt = std::abs(st.knots[i].timestamp - t);
    if (dt < best_dt) {
      best_dt = dt;
      best = static_cast<int>(i);
    }
  }
  if (best < 0) throw std::runtime_error("error term: timestamp outside window");
  return best;
}

int bracketing_interval(const EstimatorState& st, double t) {
  for (size_t i = 0; i + 1 < st.knots.size(); ++i) {
    if (t > st.knots[i].timestamp && t <= st.knots[i + 1].timestamp + 1e-12)
      return static_cast<int>(i);
  }
  throw std::runtime_error("error term: timestamp outside window");
}

}  // namespace

EvaluatedTerm error_term_with_jacobian(const EstimatorState& window,
                                       const std::vector<Measurement>& z,
                                       const MheConfig& cfg) {
  if (z.empty()) throw std::runtime_error("error term: no measurements");
  for (const auto& m : z) {
    m.validate();
    if (m.kind != z.front().kind)
      throw std::runtime_error("error term: mixed measurement kinds");
  }

  switch (z.front().kind) {
    case MeasurementKind::kPoseUpdate: {
      if (z.size() != 1) throw std::runtime_error("error term: one pose update at a time");
      const int k = nearest_knot(window, z[0].timestamp, cfg.knot_spacing);
      return pose_update_term(window, k, z[0], cfg);
    }
    case MeasurementKind::kWheelOdometry: {
      const int k = bracketing_interval(window, z[0].timestamp);
      double wl = 0.0, wr = 0.0;
      bool stationary = true;
      for (const auto& m : z) {
        if (bracketing_interval(window, m.timestamp) != k)
          throw std::runtime_error("error term: odometry batch spans intervals");
        wl += m.wheel_left;
        wr += m.wheel_right;
        stationary = stationary && std::abs(m.wheel_left) < cfg.stationary_threshold &&
                     std::abs(m.wheel_right) < cfg.stationary_threshold;
      }
      wl /= static_cast<double>(z.size());
      wr /= static_cast<double>(z.size());
      return odometry_term(window, k, wl, wr, stationary, cfg);
    }
    case MeasurementKind::kImu: {
      const int k = bracketing_interval(window, z[0].timestamp);
      ImuPreintegration preint(window.gyro_bias, window.accel_bias);
      double prev = window.knots[k].timestamp;
      for (const auto& m : z) {
        if (bracketing_interval(window, m.timestamp) != k)
          throw std::runtime_error("error term: imu batch spans intervals");
        preint.integrate(m.angular_velocity, m.specific_force, m.timestamp - prev);
        prev = m.timestamp;
      }
      return imu_term(window, k, preint, cfg);
    }
  }
  throw std::runtime_error("error term: unknown measurement kind");
}

Eigen::VectorXd error_term(const EstimatorState& window, const std::vector<Measurement>& z,
                           const MheConfig& cfg) {
  return error_term_with_jacobian(window, z, cfg).error;
}

}  // namespace mobiman::estimation
