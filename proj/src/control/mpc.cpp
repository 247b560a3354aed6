#include "mobiman/control/mpc.hpp"

#include <Eigen/Cholesky>
#include <cstdio>
#include <cstdlib>
#include <stdexcept>

#include "mobiman/geometry/so3.hpp"

namespace mobiman::control {

namespace {

using Vec6 = Eigen::Matrix<double, 6, 1>;
using Vec9 = Eigen::Matrix<double, 9, 1>;
using Mat9 = Eigen::Matrix<double, 9, 9>;

Vec9 state_delta(const RobotState9& x, const RobotState9& ref) {
  Vec9 d = x - ref;
  d[2] = geometry::wrap_angle(d[2]);
  return d;
}

// Tracking error of the end-effector pose and its state Jacobian under the
// global perturbation convention shared with Pose boxminus.
struct EeError {
  Vec6 e;
  Eigen::Matrix<double, 6, 9> J;
};

EeError ee_error(const KinematicModel& model, const RobotState9& x,
                 const geometry::Pose& ref) {
  const geometry::Pose p = forward_kinematics(model, x);
  EeError out;
  out.e = geometry::boxminus(p, ref);
  out.J = ee_jacobian(model, x);
  out.J.bottomRows<3>() =
      geometry::left_jacobian_inv_so3(out.e.tail<3>()) * out.J.bottomRows<3>();
  return out;
}

// Quadratic expansion of the stage cost at one knot (input part excluded).
struct StageExpansion {
  double l = 0.0;
  Vec9 lx = Vec9::Zero();
  Mat9 lxx = Mat9::Zero();
};

StageExpansion state_cost(const KinematicModel& model, const RobotState9& x, size_t k,
                          const MpcReference& ref, const MpcCostConfig& cfg, double w,
                          bool terminal) {
  StageExpansion out;
  if (cfg.alpha < 0.5) {
    const Vec9 d = state_delta(x, ref.state_ref[k]);
    const Vec9 qd = cfg.q_state.cwiseProduct(d);
    out.l = w * d.dot(qd);
    out.lx = 2.0 * w * qd;
    out.lxx = (2.0 * w * cfg.q_state).asDiagonal();
    return out;
  }
  const EeError ee = ee_error(model, x, ref.ee_ref[k]);
  const Vec6 qe = cfg.q_ee.cwiseProduct(ee.e);
  out.l = w * ee.e.dot(qe);
  out.lx = 2.0 * w * ee.J.transpose() * qe;
  out.lxx = 2.0 * w * ee.J.transpose() * cfg.q_ee.asDiagonal() * ee.J;

  const Vec9 d = state_delta(x, model.default_state());
  const Vec9 qd = cfg.q_default.cwiseProduct(d);
  out.l += w * d.dot(qd);
  out.lx += 2.0 * w * qd;
  out.lxx += Mat9((2.0 * w * cfg.q_default).asDiagonal());

  if (terminal) {
    const Vec6 qt = cfg.q_ee_terminal.cwiseProduct(ee.e);
    out.l += ee.e.dot(qt);
    out.lx += 2.0 * ee.J.transpose() * qt;
    out.lxx += 2.0 * ee.J.transpose() * cfg.q_ee_terminal.asDiagonal() * ee.J;
  }
  return out;
}

double trapezoid_weight(size_t k, size_t n_knots, double dt) {
  return (k == 0 || k == n_knots) ? 0.5 * dt : dt;
}

ControlInput9 clamp_input(const ControlInput9& u, const ControlInput9& lim) {
  return u.cwiseMax(-lim).cwiseMin(lim);
}

}  // namespace

void MpcCostConfig::validate() const {
  if (alpha != 0.0 && alpha != 1.0)
    throw std::runtime_error("mpc alpha must be exactly 0 or 1");
  if (!(horizon > 0.0)) throw std::runtime_error("mpc horizon must be positive");
  if (knots < 2) throw std::runtime_error("mpc needs at least 2 knots");
  if ((q_state.array() < 0).any() || (q_ee.array() < 0).any() ||
      (q_default.array() < 0).any() || (r_input.array() < 0).any() ||
      (q_ee_terminal.array() < 0).any())
    throw std::runtime_error("mpc weights must be nonnegative");
  if (!(nominal_speed > 0.0) || !(nominal_angular_speed > 0.0))
    throw std::runtime_error("mpc nominal speeds must be positive");
}

RobotState9 mpc_dynamics(const RobotState9& x, const ControlInput9& u, double dt) {
  RobotState9 n = x;
  n[0] += dt * u[0] * std::cos(x[2]);
  n[1] += dt * u[0] * std::sin(x[2]);
  n[2] += dt * u[1];
  n.tail<6>() += dt * u.tail<6>();
  return n;
}

double mpc_cost(const KinematicModel& model, const std::vector<RobotState9>& states,
                const std::vector<ControlInput9>& inputs, const MpcReference& ref,
                const MpcCostConfig& cfg) {
  cfg.validate();
  const size_t n = inputs.size();
  if (states.size() != n + 1) throw std::runtime_error("mpc trajectory size mismatch");
  if (cfg.alpha < 0.5 && ref.state_ref.size() != n + 1)
    throw std::runtime_error("mpc state reference size mismatch");
  if (cfg.alpha >= 0.5 && ref.ee_ref.size() != n + 1)
    throw std::runtime_error("mpc ee reference size mismatch");

  const double dt = cfg.horizon / static_cast<double>(n);
  double j = 0.0;
  for (size_t k = 0; k <= n; ++k)
    j += state_cost(model, states[k], k, ref, cfg, trapezoid_weight(k, n, dt), k == n)
             .l;
  for (size_t k = 0; k < n; ++k)
    j += dt * inputs[k].dot(cfg.r_input.cwiseProduct(inputs[k]));
  return j;
}

Eigen::VectorXd mpc_cost_gradient(const KinematicModel& model,
                                  const std::vector<RobotState9>& states,
                                  const std::vector<ControlInput9>& inputs,
                                  const MpcReference& ref, const MpcCostConfig& cfg) {
  const size_t n = inputs.size();
  const double dt = cfg.horizon / static_cast<double>(n);
  Eigen::VectorXd g = Eigen::VectorXd::Zero(9 * (2 * n + 1));
  for (size_t k = 0; k <= n; ++k)
    g.segment<9>(9 * k) =
        state_cost(model, states[k], k, ref, cfg, trapezoid_weight(k, n, dt), k == n)
            .lx;
  for (size_t k = 0; k < n; ++k)
    g.segment<9>(9 * (n + 1 + k)) = 2.0 * dt * cfg.r_input.cwiseProduct(inputs[k]);
  return g;
}

MpcPlan mpc_solve(const KinematicModel& model, const RobotState9& x0,
                  const MpcReference& ref, const MpcCostConfig& cfg,
                  const MpcPlan* warm_start) {
  cfg.validate();
  model.validate();
  const int n = cfg.knots;
  const double dt = cfg.dt();
  const ControlInput9 lim = model.input_limits();

  MpcPlan plan;
  plan.inputs.assign(n, ControlInput9::Zero());
  if (warm_start && static_cast<int>(warm_start->inputs.size()) == n) {
    for (int k = 0; k < n; ++k)
      plan.inputs[k] = clamp_input(warm_start->inputs[std::min(k + 1, n - 1)], lim);
  }

  auto rollout = [&](const std::vector<ControlInput9>& u) {
    std::vector<RobotState9> xs(n + 1);
    xs[0] = x0;
    for (int k = 0; k < n; ++k) xs[k + 1] = mpc_dynamics(xs[k], u[k], dt);
    return xs;
  };
  plan.states = rollout(plan.inputs);
  plan.cost = mpc_cost(model, plan.states, plan.inputs, ref, cfg);

  double mu = 1e-6;
  constexpr double kMuMax = 1e8;
  constexpr int kMaxIterations = 30;
  const bool debug = std::getenv("MOBIMAN_MPC_DEBUG") != nullptr;
  bool converged = false;
  int iter = 0;
  for (; iter < kMaxIterations; ++iter) {
    // Backward pass on the Gauss-Newton expansion.
    std::vector<ControlInput9> kff(n);
    std::vector<Mat9> kfb(n);
    {
      StageExpansion terminal = state_cost(model, plan.states[n], n, ref, cfg,
                                           trapezoid_weight(n, n, dt), true);
      Vec9 vx = terminal.lx;
      Mat9 vxx = terminal.lxx;
      bool backward_ok = true;
      for (int k = n - 1; k >= 0; --k) {
        const RobotState9& x = plan.states[k];
        const ControlInput9& u = plan.inputs[k];
        Mat9 a = Mat9::Identity();
        a(0, 2) = -dt * u[0] * std::sin(x[2]);
        a(1, 2) = dt * u[0] * std::cos(x[2]);
        Eigen::Matrix<double, 9, 9> b = Eigen::Matrix<double, 9, 9>::Zero();
        b(0, 0) = dt * std::cos(x[2]);
        b(1, 0) = dt * std::sin(x[2]);
        b(2, 1) = dt;
        b.bottomRightCorner<6, 6>() = dt * Eigen::Matrix<double, 6, 6>::Identity();

        const StageExpansion st =
            state_cost(model, x, k, ref, cfg, trapezoid_weight(k, n, dt), false);
        const Vec9 lu = 2.0 * dt * cfg.r_input.cwiseProduct(u);
        const Mat9 luu = (2.0 * dt * cfg.r_input).asDiagonal();

        const Vec9 qx = st.lx + a.transpose() * vx;
        const Vec9 qu = lu + b.transpose() * vx;
        Mat9 qxx = st.lxx + a.transpose() * vxx * a;
        Mat9 quu = luu + b.transpose() * vxx * b;
        Mat9 qux = b.transpose() * vxx * a;

        // Second-order dynamics terms (full DDP, not Gauss-Newton). Without
        // them the lateral base direction is invisible to the expansion at
        // low speed and parking maneuvers stall.
        const double c = std::cos(x[2]);
        const double s = std::sin(x[2]);
        qxx(2, 2) += vx[0] * (-dt * u[0] * c) + vx[1] * (-dt * u[0] * s);
        qux(0, 2) += vx[0] * (-dt * s) + vx[1] * (dt * c);
        quu.diagonal().array() += mu;

        const Eigen::LDLT<Mat9> ldlt(quu);
        if (ldlt.info() != Eigen::Success) {
          backward_ok = false;
          break;
        }
        kff[k] = -ldlt.solve(qu);
        kfb[k] = -ldlt.solve(qux);

        vx = qx + kfb[k].transpose() * quu * kff[k] + kfb[k].transpose() * qu +
             qux.transpose() * kff[k];
        vxx = qxx + kfb[k].transpose() * quu * kfb[k] + kfb[k].transpose() * qux +
              qux.transpose() * kfb[k];
        vxx = 0.5 * (vxx + vxx.transpose()).eval();
      }
      if (!backward_ok) {
        mu *= 10.0;
        if (mu > kMuMax) break;
        continue;
      }
    }

    // Stationarity: a vanishing feed-forward step means a local optimum.
    double step_norm = 0.0;
    for (int k = 0; k < n; ++k) step_norm = std::max(step_norm, kff[k].lpNorm<Eigen::Infinity>());
    if (step_norm < 1e-9) {
      converged = true;
      break;
    }

    // Line-searched closed-loop forward pass with input clamping.
    bool improved = false;
    double eps_used = 0.0;
    for (double eps = 1.0; eps > 1e-4; eps *= 0.5) {
      std::vector<ControlInput9> u_try(n);
      std::vector<RobotState9> x_try(n + 1);
      x_try[0] = x0;
      for (int k = 0; k < n; ++k) {
        Vec9 dx = x_try[k] - plan.states[k];
        dx[2] = geometry::wrap_angle(dx[2]);
        u_try[k] = clamp_input(plan.inputs[k] + eps * kff[k] + kfb[k] * dx, lim);
        x_try[k + 1] = mpc_dynamics(x_try[k], u_try[k], dt);
      }
      const double cost_try = mpc_cost(model, x_try, u_try, ref, cfg);
      if (cost_try < plan.cost - 1e-12) {
        const double drop = plan.cost - cost_try;
        plan.inputs = std::move(u_try);
        plan.states = std::move(x_try);
        plan.cost = cost_try;
        improved = true;
        eps_used = eps;
        mu = std::max(1e-6, mu * 0.5);
        if (drop < 1e-10 * (1.0 + std::abs(plan.cost))) converged = true;
        break;
      }
    }
    if (debug)
      std::fprintf(stderr, "  it=%2d cost=%.9f mu=%.1e eps=%g kff=%.3e\n", iter,
                   plan.cost, mu, eps_used, step_norm);
    if (converged) break;
    if (!improved) {
      mu *= 10.0;
      if (mu > kMuMax) break;  // stalled: keep the best feasible plan
    }
  }

  plan.iterations = iter;
  plan.converged = converged;
  if (!converged) plan.diagnostic = "mpc stalled before reaching stationarity";
  return plan;
}

std::vector<geometry::Pose> reference_interpolate(const geometry::Pose& current,
                                                  const geometry::Pose& target,
                                                  const MpcCostConfig& cfg) {
  const Eigen::Vector3d dp = target.position - current.position;
  const double dist = dp.norm();
  const double angle =
      geometry::rotation_angle(target.orientation * current.orientation.inverse());

  std::vector<geometry::Pose> refs(cfg.knots + 1);
  for (int k = 0; k <= cfg.knots; ++k) {
    const double t = cfg.dt() * k;
    double s = 1.0;
    if (dist > 1e-12) s = std::min(s, cfg.nominal_speed * t / dist);
    if (angle > 1e-12) s = std::min(s, cfg.nominal_angular_speed * t / angle);
    refs[k] = geometry::Pose(current.position + s * dp,
                             current.orientation.slerp(s, target.orientation));
  }
  return refs;
}

std::vector<RobotState9> sample_base_reference(const planning::BaseTrajectory& traj,
                                               double t_now, const KinematicModel& model,
                                               const MpcCostConfig& cfg) {
  if (traj.empty()) throw std::runtime_error("cannot sample an empty base trajectory");
  std::vector<RobotState9> refs(cfg.knots + 1);
  for (int k = 0; k <= cfg.knots; ++k) {
    const double t = t_now + cfg.dt() * k;
    const auto& wps = traj.waypoints;
    RobotState9 x = model.default_state();
    if (t <= wps.front().t) {
      x[0] = wps.front().x;
      x[1] = wps.front().y;
      x[2] = wps.front().theta;
    } else if (t >= wps.back().t) {
      x[0] = wps.back().x;
      x[1] = wps.back().y;
      x[2] = wps.back().theta;
    } else {
      size_t i = 1;
      while (wps[i].t < t) ++i;
      const auto& a = wps[i - 1];
      const auto& b = wps[i];
      const double s = (t - a.t) / (b.t - a.t);
      x[0] = a.x + s * (b.x - a.x);
      x[1] = a.y + s * (b.y - a.y);
      x[2] = a.theta + s * geometry::wrap_angle(b.theta - a.theta);
    }
    refs[k] = x;
  }
  return refs;
}

}  // namespace mobiman::control
