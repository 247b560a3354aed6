#include "mobiman/control/ik.hpp"

#include <Eigen/Cholesky>

#include "mobiman/common/rng.hpp"

namespace mobiman::control {

IkResult ik_solve(const KinematicModel& model, const geometry::Pose& target,
                  const Eigen::Matrix<double, 6, 1>& seed_joints,
                  const geometry::Pose2d& base_pose, const IkConfig& config) {
  model.validate();
  RobotState9 x;
  x << base_pose.x, base_pose.y, base_pose.theta, seed_joints;

  IkResult result;
  result.joints = seed_joints;
  result.residual = geometry::boxminus(forward_kinematics(model, x), target).norm();

  // Damping adapts Levenberg style: a step that grows the residual is
  // rejected and retried stiffer, which rides out ill-conditioned poses.
  // A stretch without meaningful progress means a singular local minimum;
  // restart from a deterministic jitter, alternating around the best
  // configuration seen and the caller's initial guess, widening each time.
  const Eigen::Matrix<double, 6, 1> initial_joints = x.tail<6>();
  double damping = config.damping;
  int since_improvement = 0;
  int restarts = 0;
  Rng jitter(0x1275eedULL);
  for (int iter = 0; iter < config.max_iterations; ++iter) {
    result.iterations = iter;
    const geometry::Vector6d e =
        geometry::boxminus(forward_kinematics(model, x), target);
    const double norm = e.norm();
    if (norm < result.residual) {
      result.joints = x.tail<6>();
      // A sub-permille gain is a crawl, not progress toward a root.
      if (norm < result.residual * (1.0 - 1e-3)) since_improvement = 0;
      result.residual = norm;
    }
    if (norm >= config.tolerance && ++since_improvement > 12) {
      const Eigen::Matrix<double, 6, 1>& base =
          (restarts % 2 == 0) ? result.joints : initial_joints;
      const double radius = std::min(0.3 * (1 + restarts), 1.5);
      for (int i = 0; i < 6; ++i)
        x[3 + i] = std::clamp(base[i] + jitter.uniform(-radius, radius),
                              model.joints[i].limit_lower, model.joints[i].limit_upper);
      damping = config.damping;
      since_improvement = 0;
      ++restarts;
      continue;
    }
    if (norm < config.tolerance) {
      result.ok = true;
      return result;
    }

    const Eigen::Matrix<double, 6, 6> J =
        ee_jacobian(model, x).rightCols<6>();
    const Eigen::Matrix<double, 6, 6> jtj = J.transpose() * J;
    const Eigen::Matrix<double, 6, 1> rhs = J.transpose() * (-e);

    RobotState9 x_next = x;
    for (;; damping *= 10.0) {
      const Eigen::Matrix<double, 6, 6> h =
          jtj + damping * damping * Eigen::Matrix<double, 6, 6>::Identity();
      Eigen::Matrix<double, 6, 1> dq = h.ldlt().solve(rhs);
      const double step = dq.lpNorm<Eigen::Infinity>();
      if (step > config.max_step) dq *= config.max_step / step;

      x_next = x;
      for (int i = 0; i < 6; ++i)
        x_next[3 + i] = std::clamp(x[3 + i] + dq[i], model.joints[i].limit_lower,
                                   model.joints[i].limit_upper);
      const double norm_next =
          geometry::boxminus(forward_kinematics(model, x_next), target).norm();
      if (norm_next < norm || damping >= 1e3) break;
    }
    x = x_next;
    damping = std::max(config.damping, damping * 0.25);
  }
  result.iterations = config.max_iterations;
  result.diagnostic = "ik did not converge within the iteration budget";
  return result;
}

}  // namespace mobiman::control
