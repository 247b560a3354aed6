#pragma once

#include <string>
#include <vector>

#include "mobiman/estimation/error_terms.hpp"
#include "mobiman/estimation/types.hpp"

namespace mobiman::estimation {

struct MheSolution {
  EstimatorState state;
  bool ok = false;
  int iterations = 0;
  double final_cost = 0.0;
  std::string diagnostic;
};

// Nonlinear least-squares solve of one window. Measurements are associated
// to knots/intervals by timestamp; `initial` supplies knot count, timestamps
// and the linearization point. Fails (ok = false, state = initial) when the
// problem carries no absolute pose information (no pose update, no active
// prior) or the normal equations are rank-deficient.
MheSolution mhe_solve(const std::vector<Measurement>& measurements,
                      const EstimatorState& initial, const MheConfig& cfg,
                      const PriorInfo& prior = PriorInfo{});

// Strapdown propagation of the newest knot through IMU samples newer than
// it, up to target_time (coasting on constant velocity past the last
// sample). `stale` is set when any gap exceeds cfg.max_imu_gap.
PropagatedState propagate_with_imu(const EstimatorState& state,
                                   const std::vector<Measurement>& imu, double target_time,
                                   const MheConfig& cfg);

// Streaming wrapper: one writer appends measurements, update() advances the
// knot grid and solves, the published state snapshot is immutable.
class MovingHorizonEstimator {
 public:
  MovingHorizonEstimator(const MheConfig& cfg, const geometry::Pose& initial_pose,
                         double start_time);

  void add_measurement(const Measurement& m);

  // Extends the knot grid up to `time` (a multiple of the knot spacing away
  // from the start time), drops knots beyond the window into the prior, and
  // solves. Returns the solution for inspection.
  MheSolution update(double time);

  const EstimatorState& state() const { return state_; }
  const MheConfig& config() const { return cfg_; }

  // Pose at target_time on the controller clock, via IMU forward propagation.
  PropagatedState propagate(double target_time) const;

 private:
  MheConfig cfg_;
  EstimatorState state_;
  std::vector<Measurement> buffer_;
  PriorInfo prior_;
  double start_time_ = 0.0;
};

}  // namespace mobiman::estimation
