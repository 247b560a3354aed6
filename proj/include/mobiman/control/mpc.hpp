#pragma once

#include <string>
#include <vector>

#include "mobiman/control/kinematic_model.hpp"
#include "mobiman/planning/rrt_star.hpp"

namespace mobiman::control {

// Weights for the unified tracking cost: a base-plan term (alpha = 0) or an
// end-effector term with posture regularization and a terminal pose cost
// (alpha = 1), plus an input penalty that is always active.
struct MpcCostConfig {
  double alpha = 0.0;  // selects the active tracking mode, 0 or 1
  Eigen::Matrix<double, 9, 1> q_state = Eigen::Matrix<double, 9, 1>::Ones();
  Eigen::Matrix<double, 6, 1> q_ee = Eigen::Matrix<double, 6, 1>::Ones();
  Eigen::Matrix<double, 9, 1> q_default =
      0.01 * (Eigen::Matrix<double, 9, 1>() << 0, 0, 0, 3, 10, 10, 0, 5, 0).finished();
  Eigen::Matrix<double, 9, 1> r_input = Eigen::Matrix<double, 9, 1>::Ones();
  Eigen::Matrix<double, 6, 1> q_ee_terminal =
      10.0 * Eigen::Matrix<double, 6, 1>::Ones();
  double horizon = 1.0;  // seconds
  int knots = 20;        // integration intervals over the horizon
  double nominal_speed = 0.5;          // m/s, reference interpolation
  double nominal_angular_speed = 0.5;  // rad/s

  double dt() const { return horizon / knots; }

  // Throws std::runtime_error on negative weights, alpha outside {0,1}, or a
  // degenerate horizon.
  void validate() const;
};

// Per-knot references; state_ref drives the alpha = 0 cost, ee_ref the
// alpha = 1 cost. Both sized knots + 1 when used.
struct MpcReference {
  std::vector<RobotState9> state_ref;
  std::vector<geometry::Pose> ee_ref;
};

struct MpcPlan {
  std::vector<RobotState9> states;   // knots + 1
  std::vector<ControlInput9> inputs; // knots
  double cost = 0.0;
  bool converged = false;
  int iterations = 0;
  std::string diagnostic;
};

// Forward-Euler rollout step of the kinematic plant.
RobotState9 mpc_dynamics(const RobotState9& x, const ControlInput9& u, double dt);

// Trapezoidal time integral of the active tracking cost plus the input
// penalty and the terminal end-effector cost.
double mpc_cost(const KinematicModel& model, const std::vector<RobotState9>& states,
                const std::vector<ControlInput9>& inputs, const MpcReference& ref,
                const MpcCostConfig& cfg);

// Analytic gradient of mpc_cost with states and inputs treated as free
// variables, laid out as [x_0..x_N, u_0..u_{N-1}]. Shares the expansion code
// the solver uses, so finite-difference agreement validates the solver's
// derivatives.
Eigen::VectorXd mpc_cost_gradient(const KinematicModel& model,
                                  const std::vector<RobotState9>& states,
                                  const std::vector<ControlInput9>& inputs,
                                  const MpcReference& ref, const MpcCostConfig& cfg);

// Iterative LQR over the horizon with per-input magnitude clamping from the
// model limits; warm started from a previous plan shifted by one knot when
// provided. Returns the best feasible plan, flagged unconverged on stall.
MpcPlan mpc_solve(const KinematicModel& model, const RobotState9& x0,
                  const MpcReference& ref, const MpcCostConfig& cfg,
                  const MpcPlan* warm_start = nullptr);

// Geodesic reference interpolation toward a far target: knot k's reference
// advances from the current pose by at most the nominal linear and angular
// budgets for time k*dt, reaching the target exactly when it is close enough.
std::vector<geometry::Pose> reference_interpolate(const geometry::Pose& current,
                                                  const geometry::Pose& target,
                                                  const MpcCostConfig& cfg);

// Samples a planned base trajectory at the MPC knot times starting from
// t_now (clamping at the ends) and fills the arm entries with the default
// posture; the alpha = 0 reference.
std::vector<RobotState9> sample_base_reference(const planning::BaseTrajectory& traj,
                                               double t_now, const KinematicModel& model,
                                               const MpcCostConfig& cfg);

}  // namespace mobiman::control
