#include "mobiman/estimation/mhe.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "mobiman/geometry/so3.hpp"

namespace mobiman::estimation {

namespace {

// Measurements grouped into solver terms for one window.
struct TermSet {
  std::vector<std::pair<int, const Measurement*>> pose_updates;  // knot index
  // Per interval: averaged wheel speeds + stationary flag.
  struct OdoInterval {
    double wl = 0.0, wr = 0.0;
    int count = 0;
    bool stationary = true;
  };
  std::vector<OdoInterval> odometry;             // size knots-1
  std::vector<std::vector<const Measurement*>> imu;  // size knots-1
};

int interval_of(const EstimatorState& st, double t) {
  for (size_t i = 0; i + 1 < st.knots.size(); ++i) {
    if (t > st.knots[i].timestamp && t <= st.knots[i + 1].timestamp + 1e-12)
      return static_cast<int>(i);
  }
  return -1;
}

int nearest_knot_within(const EstimatorState& st, double t, double spacing) {
  int best = -1;
  double best_dt = 0.51 * spacing;
  for (size_t i = 0; i < st.knots.size(); ++i) {
    const double dt = std::abs(st.knots[i].timestamp - t);
    if (dt < best_dt) {
      best_dt = dt;
      best = static_cast<int>(i);
    }
  }
  return best;
}

TermSet associate(const std::vector<Measurement>& measurements, const EstimatorState& st,
                  const MheConfig& cfg) {
  TermSet set;
  const size_t n_intervals = st.knots.size() - 1;
  set.odometry.resize(n_intervals);
  set.imu.resize(n_intervals);
  for (const auto& m : measurements) {
    m.validate();
    switch (m.kind) {
      case MeasurementKind::kPoseUpdate: {
        const int k = nearest_knot_within(st, m.timestamp, cfg.knot_spacing);
        if (k >= 0) set.pose_updates.emplace_back(k, &m);
        break;
      }
      case MeasurementKind::kWheelOdometry: {
        const int k = interval_of(st, m.timestamp);
        if (k < 0) break;
        auto& o = set.odometry[k];
        o.wl += m.wheel_left;
        o.wr += m.wheel_right;
        o.count += 1;
        o.stationary = o.stationary && std::abs(m.wheel_left) < cfg.stationary_threshold &&
                       std::abs(m.wheel_right) < cfg.stationary_threshold;
        break;
      }
      case MeasurementKind::kImu: {
        const int k = interval_of(st, m.timestamp);
        if (k >= 0) set.imu[k].push_back(&m);
        break;
      }
    }
  }
  for (auto& batch : set.imu) {
    std::sort(batch.begin(), batch.end(),
              [](const Measurement* a, const Measurement* b) {
                return a->timestamp < b->timestamp;
              });
  }
  return set;
}

std::vector<EvaluatedTerm> build_terms(const TermSet& set, const EstimatorState& st,
                                       const MheConfig& cfg, const PriorInfo& prior,
                                       const std::vector<ImuPreintegration>& preints) {
  std::vector<EvaluatedTerm> terms;
  for (const auto& [k, z] : set.pose_updates)
    terms.push_back(pose_update_term(st, k, *z, cfg));
  for (size_t k = 0; k < set.odometry.size(); ++k) {
    const auto& o = set.odometry[k];
    if (o.count == 0) continue;
    terms.push_back(odometry_term(st, static_cast<int>(k), o.wl / o.count, o.wr / o.count,
                                  o.stationary, cfg));
  }
  for (size_t k = 0; k < preints.size(); ++k) {
    if (preints[k].sample_count() == 0) continue;
    terms.push_back(imu_term(st, static_cast<int>(k), preints[k], cfg));
  }
  if (prior.active) terms.push_back(prior_term(st, prior, cfg));
  return terms;
}

double total_cost(const std::vector<EvaluatedTerm>& terms) {
  double c = 0.0;
  for (const auto& t : terms) c += 0.5 * t.error.squaredNorm();
  return c;
}

}  // namespace

MheSolution mhe_solve(const std::vector<Measurement>& measurements,
                      const EstimatorState& initial, const MheConfig& cfg,
                      const PriorInfo& prior) {
  cfg.validate();
  initial.validate(cfg.window_size);
  if (initial.knots.empty()) throw std::runtime_error("mhe: empty window");

  MheSolution sol;
  sol.state = initial;

  const TermSet set = associate(measurements, initial, cfg);
  if (set.pose_updates.empty() && !prior.active) {
    sol.ok = false;
    sol.diagnostic = "gauge freedom: no pose-class constraint in window";
    return sol;
  }

  // Preintegrate each interval once at the initial bias linearization; the
  // bias Jacobians absorb in-solve bias motion.
  std::vector<ImuPreintegration> preints;
  preints.reserve(set.imu.size());
  for (size_t k = 0; k < set.imu.size(); ++k) {
    ImuPreintegration p(initial.gyro_bias, initial.accel_bias);
    double prev = initial.knots[k].timestamp;
    for (const Measurement* m : set.imu[k]) {
      p.integrate(m->angular_velocity, m->specific_force, m->timestamp - prev);
      prev = m->timestamp;
    }
    preints.push_back(p);
  }

  EstimatorState state = initial;
  std::vector<EvaluatedTerm> terms = build_terms(set, state, cfg, prior, preints);
  double cost = total_cost(terms);
  double lambda = 1e-8;
  const int dim = state.dim();

  for (int iter = 0; iter < 50; ++iter) {
    sol.iterations = iter + 1;
    Eigen::MatrixXd H = Eigen::MatrixXd::Zero(dim, dim);
    Eigen::VectorXd g = Eigen::VectorXd::Zero(dim);
    for (const auto& t : terms) {
      H.noalias() += t.jacobian.transpose() * t.jacobian;
      g.noalias() += t.jacobian.transpose() * t.error;
    }
    if (!g.allFinite()) {
      sol.ok = false;
      sol.diagnostic = "non-finite gradient";
      sol.state = initial;
      return sol;
    }

    bool stepped = false;
    Eigen::VectorXd delta;
    for (int attempt = 0; attempt < 10; ++attempt) {
      Eigen::MatrixXd Hd = H;
      Hd.diagonal().array() += lambda * (H.diagonal().array().maxCoeff() + 1e-12);
      Eigen::LDLT<Eigen::MatrixXd> ldlt(Hd);
      if (ldlt.info() != Eigen::Success) {
        lambda = std::max(lambda * 10.0, 1e-6);
        continue;
      }
      delta = -ldlt.solve(g);
      if (!delta.allFinite()) {
        sol.ok = false;
        sol.diagnostic = "rank-deficient normal equations";
        sol.state = initial;
        return sol;
      }
      EstimatorState trial = state.boxplus(delta);
      std::vector<EvaluatedTerm> trial_terms = build_terms(set, trial, cfg, prior, preints);
      const double trial_cost = total_cost(trial_terms);
      if (trial_cost <= cost) {
        state = std::move(trial);
        terms = std::move(trial_terms);
        cost = trial_cost;
        lambda = std::max(lambda * 0.5, 1e-12);
        stepped = true;
        break;
      }
      lambda *= 10.0;
    }
    if (!stepped) break;
    if (delta.lpNorm<Eigen::Infinity>() < 1e-10) break;
  }

  sol.state = state;
  sol.ok = true;
  sol.final_cost = cost;
  return sol;
}

PropagatedState propagate_with_imu(const EstimatorState& state,
                                   const std::vector<Measurement>& imu, double target_time,
                                   const MheConfig& cfg) {
  if (state.knots.empty()) throw std::runtime_error("propagate: empty state");
  const Knot& last = state.knots.back();
  if (target_time < last.timestamp - 1e-12)
    throw std::runtime_error("propagate: target before last knot");

  PropagatedState out;
  out.pose = last.pose;
  out.velocity = last.velocity;

  double t = last.timestamp;
  Eigen::Quaterniond q = last.pose.orientation;
  Eigen::Vector3d p = last.pose.position;
  Eigen::Vector3d v = last.velocity;

  for (const auto& m : imu) {
    if (m.kind != MeasurementKind::kImu) continue;
    if (m.timestamp <= t + 1e-12 || m.timestamp > target_time + 1e-12) continue;
    const double dt = m.timestamp - t;
    if (dt > cfg.max_imu_gap) out.stale = true;
    const Eigen::Vector3d w = m.angular_velocity - state.gyro_bias;
    const Eigen::Vector3d f = m.specific_force - state.accel_bias;
    const Eigen::Vector3d a = q * f + cfg.gravity;
    p += v * dt + 0.5 * a * dt * dt;
    v += a * dt;
    q = q * Eigen::Quaterniond(geometry::exp_so3(w * dt));
    q.normalize();
    t = m.timestamp;
  }
  if (target_time - t > cfg.max_imu_gap) out.stale = true;
  if (target_time > t) {
    // Constant-velocity coast past the newest sample.
    p += v * (target_time - t);
  }
  out.pose = geometry::Pose(p, q);
  out.velocity = v;
  return out;
}

MovingHorizonEstimator::MovingHorizonEstimator(const MheConfig& cfg,
                                               const geometry::Pose& initial_pose,
                                               double start_time)
    : cfg_(cfg), start_time_(start_time) {
  cfg_.validate();
  Knot knot;
  knot.timestamp = start_time;
  knot.pose = initial_pose;
  state_.knots.push_back(knot);
  prior_.active = true;
  prior_.knot = knot;
}

void MovingHorizonEstimator::add_measurement(const Measurement& m) {
  m.validate();
  buffer_.push_back(m);
}

MheSolution MovingHorizonEstimator::update(double time) {
  // Extend the grid with knots initialized by IMU propagation.
  while (state_.knots.back().timestamp + cfg_.knot_spacing <= time + 1e-9) {
    const double t_new = state_.knots.back().timestamp + cfg_.knot_spacing;
    PropagatedState prop = propagate_with_imu(state_, buffer_, t_new, cfg_);
    Knot knot;
    knot.timestamp = t_new;
    knot.pose = prop.pose;
    knot.velocity = prop.velocity;
    state_.knots.push_back(knot);
  }

  // Slide the window: dropped knots fold into the prior.
  while (static_cast<int>(state_.knots.size()) > cfg_.window_size) {
    state_.knots.erase(state_.knots.begin());
    prior_.knot = state_.knots.front();
    prior_.gyro_bias = state_.gyro_bias;
    prior_.accel_bias = state_.accel_bias;
    prior_.active = true;
  }
  const double window_start = state_.knots.front().timestamp;
  buffer_.erase(std::remove_if(buffer_.begin(), buffer_.end(),
                               [&](const Measurement& m) {
                                 return m.timestamp < window_start - 0.5 * cfg_.knot_spacing;
                               }),
                buffer_.end());

  MheSolution sol = mhe_solve(buffer_, state_, cfg_, prior_);
  if (sol.ok) {
    state_ = sol.state;
    prior_.knot = state_.knots.front();
    prior_.gyro_bias = state_.gyro_bias;
    prior_.accel_bias = state_.accel_bias;
  }
  return sol;
}

PropagatedState MovingHorizonEstimator::propagate(double target_time) const {
  return propagate_with_imu(state_, buffer_, target_time, cfg_);
}

}  // namespace mobiman::estimation
