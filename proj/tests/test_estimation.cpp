#include <doctest.h>

#include <Eigen/Geometry>
#include <filesystem>
#include <fstream>

#include "mobiman/common/rng.hpp"
#include "mobiman/estimation/differential_drive.hpp"
#include "mobiman/estimation/error_terms.hpp"
#include "mobiman/estimation/measurement_log.hpp"
#include "mobiman/estimation/mhe.hpp"
#include "test_util.hpp"

using namespace mobiman;
using namespace mobiman::estimation;
using geometry::Pose;

namespace {

MheConfig test_config() {
  MheConfig cfg;
  cfg.wheel_radius = 0.1;
  cfg.track_width = 0.5;
  return cfg;
}

EstimatorState two_knot_state(Rng& rng, double spacing = 0.1) {
  EstimatorState st;
  for (int k = 0; k < 2; ++k) {
    Knot knot;
    knot.timestamp = spacing * k;
    knot.pose = test_util::random_pose(rng, 0.5);
    knot.velocity = Eigen::Vector3d(rng.normal(), rng.normal(), rng.normal()) * 0.3;
    st.knots.push_back(knot);
  }
  st.gyro_bias = Eigen::Vector3d(rng.normal(), rng.normal(), rng.normal()) * 0.01;
  st.accel_bias = Eigen::Vector3d(rng.normal(), rng.normal(), rng.normal()) * 0.05;
  return st;
}

// Exact measurements for a straight drive at constant speed along +x.
struct StraightDrive {
  std::vector<Measurement> measurements;
  std::vector<Knot> truth;
};

StraightDrive make_straight_drive(double v, double duration, const MheConfig& cfg) {
  StraightDrive out;
  const double wheel_omega = v / cfg.wheel_radius;
  const int n_knots = static_cast<int>(std::round(duration / cfg.knot_spacing)) + 1;
  for (int k = 0; k < n_knots; ++k) {
    Knot knot;
    knot.timestamp = cfg.knot_spacing * k;
    knot.pose = Pose(Eigen::Vector3d(v * knot.timestamp, 0, 0), Eigen::Quaterniond::Identity());
    knot.velocity = Eigen::Vector3d(v, 0, 0);
    out.truth.push_back(knot);
  }
  // Wheel odometry at 100 Hz, IMU at 200 Hz, pose updates at 1 Hz.
  for (int i = 1; i <= static_cast<int>(duration * 100); ++i) {
    Measurement m;
    m.timestamp = i * 0.01;
    m.kind = MeasurementKind::kWheelOdometry;
    m.wheel_left = wheel_omega;
    m.wheel_right = wheel_omega;
    out.measurements.push_back(m);
  }
  for (int i = 1; i <= static_cast<int>(duration * 200); ++i) {
    Measurement m;
    m.timestamp = i * 0.005;
    m.kind = MeasurementKind::kImu;
    m.angular_velocity = Eigen::Vector3d::Zero();
    m.specific_force = -cfg.gravity;  // constant velocity: f = R^T (0 - g)
    out.measurements.push_back(m);
  }
  for (int i = 0; i <= static_cast<int>(duration); ++i) {
    Measurement m;
    m.timestamp = static_cast<double>(i);
    m.kind = MeasurementKind::kPoseUpdate;
    m.pose = Pose(Eigen::Vector3d(v * m.timestamp, 0, 0), Eigen::Quaterniond::Identity());
    out.measurements.push_back(m);
  }
  return out;
}

}  // namespace

TEST_CASE("differential drive: symmetric wheels go straight") {
  const Pose p0(Eigen::Vector3d(1, 2, 0),
                Eigen::Quaterniond(Eigen::AngleAxisd(0.7, Eigen::Vector3d::UnitZ())));
  const Pose p1 = differential_drive_predict(p0, 5.0, 5.0, 0.1, 0.5, 0.2);
  const double dist = 0.1 * 5.0 * 0.2;
  const Eigen::Vector3d expect =
      p0.position + p0.orientation * Eigen::Vector3d(dist, 0, 0);
  CHECK((p1.position - expect).norm() < 1e-12);
  CHECK(geometry::rotation_angle(p1.orientation.inverse() * p0.orientation) < 1e-12);
}

TEST_CASE("differential drive: opposite wheels spin in place") {
  const Pose p0(Eigen::Vector3d(0.5, -0.3, 0), Eigen::Quaterniond::Identity());
  const Pose p1 = differential_drive_predict(p0, -2.0, 2.0, 0.1, 0.5, 0.3);
  CHECK((p1.position - p0.position).norm() < 1e-12);
  const double expect_dtheta = 0.1 * 4.0 / 0.5 * 0.3;
  CHECK(geometry::rotation_angle(p1.orientation) == doctest::Approx(expect_dtheta));
}

TEST_CASE("differential drive matches fine-step numerical integration") {
  // Oracle: 1000-substep Euler integration of the unicycle ODE.
  Rng rng(0xd1ff);
  for (int trial = 0; trial < 20; ++trial) {
    const double wl = rng.uniform(-6, 6);
    const double wr = rng.uniform(-6, 6);
    const double r = 0.1, track = 0.5, dt = rng.uniform(0.05, 0.5);
    const double yaw0 = rng.uniform(-M_PI, M_PI);
    const Pose p0(Eigen::Vector3d(rng.uniform(-1, 1), rng.uniform(-1, 1), 0),
                  Eigen::Quaterniond(Eigen::AngleAxisd(yaw0, Eigen::Vector3d::UnitZ())));

    const double v = r * (wl + wr) / 2;
    const double om = r * (wr - wl) / track;
    // Midpoint rule; heading is exactly linear in time, so this is O(h^2).
    double x = p0.position.x(), y = p0.position.y(), th = yaw0;
    const int steps = 1000;
    const double h = dt / steps;
    for (int i = 0; i < steps; ++i) {
      const double th_mid = yaw0 + om * (i + 0.5) * h;
      x += v * std::cos(th_mid) * h;
      y += v * std::sin(th_mid) * h;
      th += om * h;
    }

    const Pose p1 = differential_drive_predict(p0, wl, wr, r, track, dt);
    CHECK(std::abs(p1.position.x() - x) < 1e-6);
    CHECK(std::abs(p1.position.y() - y) < 1e-6);
    CHECK(std::abs(geometry::wrap_angle(
              2.0 * std::atan2(p1.orientation.z(), p1.orientation.w()) - th)) < 1e-6);
  }
}

TEST_CASE("pose update error vanishes for a consistent measurement") {
  Rng rng(1);
  EstimatorState st = two_knot_state(rng);
  Measurement z;
  z.kind = MeasurementKind::kPoseUpdate;
  z.timestamp = st.knots[0].timestamp;
  z.pose = st.knots[0].pose;
  const Eigen::VectorXd e = error_term(st, {z}, test_config());
  CHECK(e.norm() < 1e-12);
}

TEST_CASE("odometry error vanishes for stationary wheels and equal knots") {
  Rng rng(2);
  EstimatorState st = two_knot_state(rng);
  st.knots[1].pose = st.knots[0].pose;
  Measurement z;
  z.kind = MeasurementKind::kWheelOdometry;
  z.timestamp = 0.05;
  z.wheel_left = 0.0;
  z.wheel_right = 0.0;
  const Eigen::VectorXd e = error_term(st, {z}, test_config());
  CHECK(e.norm() < 1e-12);
}

TEST_CASE("imu error vanishes for constant-acceleration closed form") {
  // Closed-form kinematics oracle: zero rotation, constant world acceleration
  // a; knots at p = a t^2 / 2, v = a t; the accelerometer reads a - g.
  MheConfig cfg = test_config();
  const Eigen::Vector3d a(0.4, -0.2, 0.1);
  const double T = cfg.knot_spacing;
  EstimatorState st;
  for (int k = 0; k < 2; ++k) {
    const double t = T * k;
    Knot knot;
    knot.timestamp = t;
    knot.pose = Pose(0.5 * a * t * t, Eigen::Quaterniond::Identity());
    knot.velocity = a * t;
    st.knots.push_back(knot);
  }
  std::vector<Measurement> batch;
  const int n = 20;
  for (int i = 1; i <= n; ++i) {
    Measurement m;
    m.timestamp = T * i / n;
    m.kind = MeasurementKind::kImu;
    m.angular_velocity = Eigen::Vector3d::Zero();
    m.specific_force = a - cfg.gravity;
    batch.push_back(m);
  }
  const Eigen::VectorXd e = error_term(st, batch, cfg);
  CHECK(e.norm() < 1e-9);
}

TEST_CASE("error term rejects timestamps outside the window") {
  Rng rng(3);
  EstimatorState st = two_knot_state(rng);
  Measurement z;
  z.kind = MeasurementKind::kPoseUpdate;
  z.timestamp = 5.0;
  z.pose = st.knots[0].pose;
  CHECK_THROWS(error_term(st, {z}, test_config()));
  z.kind = MeasurementKind::kWheelOdometry;
  CHECK_THROWS(error_term(st, {z}, test_config()));
}

TEST_CASE("all error-term jacobians match central finite differences") {
  Rng rng(0x7ac);
  MheConfig cfg = test_config();
  for (int trial = 0; trial < 10; ++trial) {
    EstimatorState st = two_knot_state(rng);

    // Pose update on knot 0.
    {
      Measurement z;
      z.kind = MeasurementKind::kPoseUpdate;
      z.timestamp = st.knots[0].timestamp;
      z.pose = test_util::random_pose(rng, 0.5);
      EvaluatedTerm term = error_term_with_jacobian(st, {z}, cfg);
      auto f = [&](const Eigen::VectorXd& d) {
        return Eigen::VectorXd(error_term(st.boxplus(d), {z}, cfg));
      };
      Eigen::MatrixXd fd =
          test_util::numeric_jacobian(f, Eigen::VectorXd::Zero(st.dim()), 1e-6);
      CHECK(test_util::relative_error(term.jacobian, fd) < 1e-5);
    }

    // Odometry between the knots.
    {
      Measurement z;
      z.kind = MeasurementKind::kWheelOdometry;
      z.timestamp = 0.05;
      z.wheel_left = rng.uniform(-5, 5);
      z.wheel_right = rng.uniform(-5, 5);
      EvaluatedTerm term = error_term_with_jacobian(st, {z}, cfg);
      auto f = [&](const Eigen::VectorXd& d) {
        return Eigen::VectorXd(error_term(st.boxplus(d), {z}, cfg));
      };
      Eigen::MatrixXd fd =
          test_util::numeric_jacobian(f, Eigen::VectorXd::Zero(st.dim()), 1e-6);
      CHECK(test_util::relative_error(term.jacobian, fd) < 1e-5);
    }

    // IMU with a fixed preintegration and a bias offset from the
    // linearization point (exercises the bias-correction jacobians).
    {
      ImuPreintegration preint(st.gyro_bias + Eigen::Vector3d(0.002, -0.001, 0.003),
                               st.accel_bias + Eigen::Vector3d(-0.01, 0.02, 0.01));
      for (int i = 0; i < 20; ++i) {
        preint.integrate(
            Eigen::Vector3d(rng.normal(), rng.normal(), rng.normal()) * 0.3,
            Eigen::Vector3d(rng.normal(), rng.normal(), rng.normal()) * 2.0 - cfg.gravity,
            0.005);
      }
      EvaluatedTerm term = imu_term(st, 0, preint, cfg);
      auto f = [&](const Eigen::VectorXd& d) {
        return Eigen::VectorXd(imu_term(st.boxplus(d), 0, preint, cfg).error);
      };
      Eigen::MatrixXd fd =
          test_util::numeric_jacobian(f, Eigen::VectorXd::Zero(st.dim()), 1e-6);
      CHECK(test_util::relative_error(term.jacobian, fd) < 1e-5);
    }

    // Prior on the oldest knot.
    {
      PriorInfo prior;
      prior.active = true;
      prior.knot.pose = test_util::random_pose(rng, 0.5);
      prior.knot.velocity = Eigen::Vector3d(rng.normal(), rng.normal(), rng.normal());
      EvaluatedTerm term = prior_term(st, prior, cfg);
      auto f = [&](const Eigen::VectorXd& d) {
        return Eigen::VectorXd(prior_term(st.boxplus(d), prior, cfg).error);
      };
      Eigen::MatrixXd fd =
          test_util::numeric_jacobian(f, Eigen::VectorXd::Zero(st.dim()), 1e-6);
      CHECK(test_util::relative_error(term.jacobian, fd) < 1e-5);
    }
  }
}

TEST_CASE("mhe with a single noiseless pose update recovers that pose") {
  MheConfig cfg = test_config();
  EstimatorState init;
  Knot knot;
  knot.timestamp = 0.0;
  knot.pose = Pose(Eigen::Vector3d(0.3, 0.1, 0.0), Eigen::Quaterniond::Identity());
  init.knots.push_back(knot);

  Measurement z;
  z.kind = MeasurementKind::kPoseUpdate;
  z.timestamp = 0.0;
  z.pose = Pose(Eigen::Vector3d(1.0, -0.5, 0.2),
                Eigen::Quaterniond(Eigen::AngleAxisd(0.4, Eigen::Vector3d::UnitZ())));
  MheSolution sol = mhe_solve({z}, init, cfg);
  REQUIRE(sol.ok);
  CHECK((sol.state.knots[0].pose.position - z.pose.position).norm() < 1e-9);
  CHECK(geometry::rotation_angle(sol.state.knots[0].pose.orientation.inverse() *
                                 z.pose.orientation) < 1e-9);
}

TEST_CASE("mhe flags gauge freedom without pose constraints") {
  MheConfig cfg = test_config();
  Rng rng(4);
  EstimatorState init = two_knot_state(rng);
  Measurement z;
  z.kind = MeasurementKind::kWheelOdometry;
  z.timestamp = 0.05;
  z.wheel_left = 1.0;
  z.wheel_right = 1.0;
  MheSolution sol = mhe_solve({z}, init, cfg);
  CHECK(!sol.ok);
  CHECK(!sol.diagnostic.empty());
  CHECK((sol.state.knots[0].pose.position - init.knots[0].pose.position).norm() == 0.0);
}

TEST_CASE("mhe recovers ground truth from exact straight-drive data") {
  MheConfig cfg = test_config();
  StraightDrive drive = make_straight_drive(0.5, 0.9, cfg);

  // Perturb the initial window away from truth.
  EstimatorState init;
  init.knots = drive.truth;
  Rng rng(5);
  for (auto& k : init.knots) {
    k.pose.position += Eigen::Vector3d(rng.uniform(-0.05, 0.05), rng.uniform(-0.05, 0.05),
                                       rng.uniform(-0.02, 0.02));
    k.pose.orientation =
        Eigen::Quaterniond(Eigen::AngleAxisd(rng.uniform(-0.05, 0.05),
                                             Eigen::Vector3d::UnitZ())) *
        k.pose.orientation;
    k.velocity += Eigen::Vector3d(rng.uniform(-0.1, 0.1), rng.uniform(-0.1, 0.1), 0);
  }

  MheSolution sol = mhe_solve(drive.measurements, init, cfg);
  REQUIRE(sol.ok);
  for (size_t k = 0; k < drive.truth.size(); ++k) {
    CHECK((sol.state.knots[k].pose.position - drive.truth[k].pose.position).norm() < 1e-6);
    CHECK(geometry::rotation_angle(sol.state.knots[k].pose.orientation.inverse() *
                                   drive.truth[k].pose.orientation) < 1e-6);
  }
}

TEST_CASE("mhe anchor invariance for redundant consistent pose updates") {
  MheConfig cfg = test_config();
  StraightDrive drive = make_straight_drive(0.5, 0.9, cfg);
  EstimatorState init;
  init.knots = drive.truth;
  init.knots[3].pose.position += Eigen::Vector3d(0.02, -0.01, 0.005);

  MheSolution a = mhe_solve(drive.measurements, init, cfg);
  auto doubled = drive.measurements;
  for (const auto& m : drive.measurements)
    if (m.kind == MeasurementKind::kPoseUpdate) doubled.push_back(m);
  MheSolution b = mhe_solve(doubled, init, cfg);
  REQUIRE(a.ok);
  REQUIRE(b.ok);
  for (size_t k = 0; k < a.state.knots.size(); ++k) {
    CHECK((a.state.knots[k].pose.position - b.state.knots[k].pose.position).norm() < 1e-9);
  }
}

TEST_CASE("stationary odometry pins the estimate harder than moving") {
  MheConfig cfg = test_config();
  auto run = [&](double wheel_speed) {
    EstimatorState init;
    for (int k = 0; k < 2; ++k) {
      Knot knot;
      knot.timestamp = 0.1 * k;
      knot.pose = Pose();
      init.knots.push_back(knot);
    }
    std::vector<Measurement> ms;
    Measurement anchor;
    anchor.kind = MeasurementKind::kPoseUpdate;
    anchor.timestamp = 0.0;
    anchor.pose = Pose();
    ms.push_back(anchor);
    for (int i = 1; i <= 10; ++i) {
      Measurement odo;
      odo.kind = MeasurementKind::kWheelOdometry;
      odo.timestamp = 0.01 * i;
      odo.wheel_left = wheel_speed;
      odo.wheel_right = wheel_speed;
      ms.push_back(odo);
    }
    Measurement conflicting;
    conflicting.kind = MeasurementKind::kPoseUpdate;
    conflicting.timestamp = 0.1;
    conflicting.pose = Pose(Eigen::Vector3d(0.05, 0, 0), Eigen::Quaterniond::Identity());
    ms.push_back(conflicting);
    MheSolution sol = mhe_solve(ms, init, cfg);
    REQUIRE(sol.ok);
    return (sol.state.knots[1].pose.position - sol.state.knots[0].pose.position).norm();
  };
  // With stationary wheels the odometry factor is near-rigid, so the two pose
  // anchors compromise but the knots stay glued together. Barely-moving wheels
  // get the loose model and let the conflict pull the knots apart.
  const double slip_stationary = run(0.0);
  const double slip_moving = run(0.002);
  CHECK(slip_stationary < 1e-6);
  CHECK(slip_moving > 100.0 * slip_stationary);
  CHECK(slip_moving > 1e-4);
}

TEST_CASE("mhe smooths noisy pose updates below their raw error") {
  MheConfig cfg = test_config();
  Rng rng(0x30b);

  MovingHorizonEstimator est(cfg, Pose(), 0.0);
  Pose truth;
  double raw_sq = 0.0, est_sq = 0.0;
  int samples = 0;

  double wl = 4.0, wr = 4.0;
  for (int k = 1; k <= 300; ++k) {
    const double t = 0.1 * k;
    if (k % 10 == 0) {
      wl = rng.uniform(2.0, 6.0);
      wr = rng.uniform(2.0, 6.0);
    }
    // Odometry at 100 Hz over the interval; truth follows the same model.
    for (int i = 1; i <= 10; ++i) {
      Measurement odo;
      odo.timestamp = t - 0.1 + 0.01 * i;
      odo.kind = MeasurementKind::kWheelOdometry;
      odo.wheel_left = wl;
      odo.wheel_right = wr;
      est.add_measurement(odo);
    }
    truth = differential_drive_predict(truth, wl, wr, cfg.wheel_radius, cfg.track_width, 0.1);

    Measurement pu;
    pu.timestamp = t;
    pu.kind = MeasurementKind::kPoseUpdate;
    pu.pose = truth;
    Eigen::Vector3d n(rng.normal(0, 0.01), rng.normal(0, 0.01), rng.normal(0, 0.01));
    pu.pose.position += n;
    pu.noise = {0.01, cfg.icp_sigma_rot};
    est.add_measurement(pu);

    MheSolution sol = est.update(t);
    REQUIRE(sol.ok);
    if (k > 20) {  // after the window fills
      raw_sq += n.squaredNorm();
      est_sq += (sol.state.knots.back().pose.position - truth.position).squaredNorm();
      ++samples;
    }
  }
  const double raw_rmse = std::sqrt(raw_sq / samples);
  const double est_rmse = std::sqrt(est_sq / samples);
  CHECK(est_rmse < raw_rmse);
}

TEST_CASE("propagation is exact for the static case") {
  MheConfig cfg = test_config();
  EstimatorState st;
  Knot knot;
  knot.timestamp = 0.0;
  knot.pose = Pose(Eigen::Vector3d(1, 2, 0),
                   Eigen::Quaterniond(Eigen::AngleAxisd(0.5, Eigen::Vector3d::UnitZ())));
  st.knots.push_back(knot);

  std::vector<Measurement> imu;
  for (int i = 1; i <= 10; ++i) {
    Measurement m;
    m.timestamp = 0.005 * i;
    m.kind = MeasurementKind::kImu;
    m.angular_velocity = Eigen::Vector3d::Zero();
    // Static: specific force cancels gravity in the body frame.
    m.specific_force = knot.pose.orientation.inverse() * (-cfg.gravity);
    imu.push_back(m);
  }
  PropagatedState prop = propagate_with_imu(st, imu, 0.05, cfg);
  CHECK(!prop.stale);
  CHECK((prop.pose.position - knot.pose.position).norm() < 1e-12);
  CHECK(geometry::rotation_angle(prop.pose.orientation.inverse() * knot.pose.orientation) <
        1e-12);
  CHECK(prop.velocity.norm() < 1e-12);
}

TEST_CASE("propagation advances yaw exactly under constant rate") {
  MheConfig cfg = test_config();
  EstimatorState st;
  Knot knot;
  knot.timestamp = 0.0;
  st.knots.push_back(knot);
  const double omega = 0.7;
  std::vector<Measurement> imu;
  for (int i = 1; i <= 20; ++i) {
    Measurement m;
    m.timestamp = 0.005 * i;
    m.kind = MeasurementKind::kImu;
    m.angular_velocity = Eigen::Vector3d(0, 0, omega);
    m.specific_force = -cfg.gravity;
    imu.push_back(m);
  }
  PropagatedState prop = propagate_with_imu(st, imu, 0.1, cfg);
  const double yaw = 2.0 * std::atan2(prop.pose.orientation.z(), prop.pose.orientation.w());
  CHECK(std::abs(yaw - omega * 0.1) < 1e-9);
}

TEST_CASE("propagation tracks an arc within 1 mm over 50 ms") {
  // Circular motion oracle: p(t) = R(sin wt, 1 - cos wt), heading wt.
  MheConfig cfg = test_config();
  const double v = 0.5, omega = 1.0, radius = v / omega;
  EstimatorState st;
  Knot knot;
  knot.timestamp = 0.0;
  knot.pose = Pose();
  knot.velocity = Eigen::Vector3d(v, 0, 0);
  st.knots.push_back(knot);

  std::vector<Measurement> imu;
  for (int i = 1; i <= 10; ++i) {
    Measurement m;
    m.timestamp = 0.005 * i;
    m.kind = MeasurementKind::kImu;
    m.angular_velocity = Eigen::Vector3d(0, 0, omega);
    // Centripetal acceleration v*omega along body +y; gravity compensated.
    const double t_mid = m.timestamp - 0.0025;
    const Eigen::Quaterniond R(Eigen::AngleAxisd(omega * t_mid, Eigen::Vector3d::UnitZ()));
    const Eigen::Vector3d a_world =
        v * omega * Eigen::Vector3d(-std::sin(omega * t_mid), std::cos(omega * t_mid), 0);
    m.specific_force = R.inverse() * (a_world - cfg.gravity);
    imu.push_back(m);
  }
  PropagatedState prop = propagate_with_imu(st, imu, 0.05, cfg);
  const double T = 0.05;
  const Eigen::Vector3d p_truth(radius * std::sin(omega * T),
                                radius * (1 - std::cos(omega * T)), 0);
  CHECK((prop.pose.position - p_truth).norm() < 1e-3);
  const double yaw = 2.0 * std::atan2(prop.pose.orientation.z(), prop.pose.orientation.w());
  CHECK(std::abs(yaw - omega * T) < 0.01 * M_PI / 180.0);
}

TEST_CASE("propagation flags stale imu streams") {
  MheConfig cfg = test_config();
  EstimatorState st;
  Knot knot;
  knot.timestamp = 0.0;
  st.knots.push_back(knot);
  PropagatedState prop = propagate_with_imu(st, {}, 0.2, cfg);
  CHECK(prop.stale);
  Measurement m;
  m.timestamp = 0.01;
  m.kind = MeasurementKind::kImu;
  m.specific_force = -cfg.gravity;
  PropagatedState ok = propagate_with_imu(st, {m}, 0.02, cfg);
  CHECK(!ok.stale);
}

TEST_CASE("estimator state validation") {
  EstimatorState st;
  Knot a, b;
  a.timestamp = 1.0;
  b.timestamp = 1.0;
  st.knots = {a, b};
  CHECK_THROWS(st.validate(10));
  st.knots[1].timestamp = 2.0;
  CHECK_NOTHROW(st.validate(10));
  CHECK_THROWS(st.validate(1));

  MheConfig cfg;
  cfg.odom_sigma_stationary = cfg.odom_sigma_moving;  // must be much smaller
  CHECK_THROWS(cfg.validate());
}

TEST_CASE("measurement log round-trips bit-exactly") {
  Rng rng(0x10c);
  std::vector<Measurement> ms;
  for (int i = 0; i < 50; ++i) {
    Measurement m;
    m.timestamp = rng.uniform(0, 100);
    const int kind = static_cast<int>(rng.uniform_index(3));
    if (kind == 0) {
      m.kind = MeasurementKind::kPoseUpdate;
      m.pose = test_util::random_pose(rng);
      if (rng.uniform01() < 0.5) m.noise = {0.03, 0.017453292519943295};
    } else if (kind == 1) {
      m.kind = MeasurementKind::kWheelOdometry;
      m.wheel_left = rng.normal();
      m.wheel_right = rng.normal();
    } else {
      m.kind = MeasurementKind::kImu;
      m.angular_velocity = Eigen::Vector3d(rng.normal(), rng.normal(), rng.normal());
      m.specific_force = Eigen::Vector3d(rng.normal(), rng.normal(), rng.normal());
    }
    ms.push_back(m);
  }
  auto path = std::filesystem::temp_directory_path() / "mobiman_measurements.log";
  write_measurement_log(path.string(), ms);
  std::vector<Measurement> back = read_measurement_log(path.string());
  REQUIRE(back.size() == ms.size());
  for (size_t i = 0; i < ms.size(); ++i) {
    CHECK(back[i].timestamp == ms[i].timestamp);
    CHECK(back[i].kind == ms[i].kind);
    if (ms[i].kind == MeasurementKind::kPoseUpdate) {
      CHECK(back[i].pose.position == ms[i].pose.position);
      CHECK(back[i].pose.orientation.coeffs() == ms[i].pose.orientation.coeffs());
      CHECK(back[i].noise == ms[i].noise);
    } else if (ms[i].kind == MeasurementKind::kWheelOdometry) {
      CHECK(back[i].wheel_left == ms[i].wheel_left);
      CHECK(back[i].wheel_right == ms[i].wheel_right);
    } else {
      CHECK(back[i].angular_velocity == ms[i].angular_velocity);
      CHECK(back[i].specific_force == ms[i].specific_force);
    }
  }
  // A second write of the parsed stream is byte-identical.
  auto path2 = std::filesystem::temp_directory_path() / "mobiman_measurements2.log";
  write_measurement_log(path2.string(), back);
  std::ifstream f1(path, std::ios::binary), f2(path2, std::ios::binary);
  std::string c1((std::istreambuf_iterator<char>(f1)), std::istreambuf_iterator<char>());
  std::string c2((std::istreambuf_iterator<char>(f2)), std::istreambuf_iterator<char>());
  CHECK(c1 == c2);
  std::filesystem::remove(path);
  std::filesystem::remove(path2);
}

TEST_CASE("measurement log rejects malformed lines") {
  auto path = std::filesystem::temp_directory_path() / "mobiman_bad.log";
  {
    std::ofstream out(path);
    out << "1.0 pose_update 1 2 3\n";
  }
  CHECK_THROWS(read_measurement_log(path.string()));
  {
    std::ofstream out(path);
    out << "1.0 telepathy 1 2 3\n";
  }
  CHECK_THROWS(read_measurement_log(path.string()));
  std::filesystem::remove(path);
}
