#include "mobiman/planning/rrt_star.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

#include "mobiman/common/rng.hpp"

namespace mobiman::planning {

void BaseTrajectory::validate(double max_spacing) const {
  for (size_t i = 1; i < waypoints.size(); ++i) {
    if (!(waypoints[i].t > waypoints[i - 1].t))
      throw std::runtime_error("trajectory timestamps must be strictly increasing");
    const double dx = waypoints[i].x - waypoints[i - 1].x;
    const double dy = waypoints[i].y - waypoints[i - 1].y;
    if (std::hypot(dx, dy) > max_spacing + 1e-9)
      throw std::runtime_error("trajectory waypoint spacing exceeds limit");
  }
}

void RrtConfig::validate() const {
  if (max_iterations <= 0) throw std::runtime_error("rrt max_iterations must be positive");
  if (!(steer_step > 0.0)) throw std::runtime_error("rrt steer_step must be positive");
  if (goal_bias < 0.0 || goal_bias > 1.0)
    throw std::runtime_error("rrt goal_bias must be in [0, 1]");
  if (!(goal_tolerance > 0.0))
    throw std::runtime_error("rrt goal_tolerance must be positive");
  if (!(nominal_speed > 0.0)) throw std::runtime_error("rrt nominal_speed must be positive");
  if (!(collision_check_spacing > 0.0))
    throw std::runtime_error("rrt collision_check_spacing must be positive");
}

namespace {

// Sweeps the footprint along the segment at the edge tangent heading.
bool edge_free(const OccupancyGrid& grid, const RobotFootprint& footprint,
               const Eigen::Vector2d& a, const Eigen::Vector2d& b, double spacing) {
  const Eigen::Vector2d d = b - a;
  const double len = d.norm();
  const double theta = std::atan2(d.y(), d.x());
  const int steps = std::max(1, static_cast<int>(std::ceil(len / spacing)));
  for (int i = 0; i <= steps; ++i) {
    const Eigen::Vector2d p = a + d * (static_cast<double>(i) / steps);
    if (footprint_hits_occupied(grid, footprint, p.x(), p.y(), theta)) return false;
  }
  return true;
}

struct Tree {
  std::vector<Eigen::Vector2d> position;
  std::vector<int> parent;
  std::vector<double> cost;
  std::vector<std::vector<int>> children;

  int add(const Eigen::Vector2d& p, int par, double c) {
    position.push_back(p);
    parent.push_back(par);
    cost.push_back(c);
    children.emplace_back();
    if (par >= 0) children[par].push_back(static_cast<int>(position.size()) - 1);
    return static_cast<int>(position.size()) - 1;
  }

  void reparent(int node, int new_parent, double new_cost) {
    auto& sibs = children[parent[node]];
    sibs.erase(std::find(sibs.begin(), sibs.end(), node));
    parent[node] = new_parent;
    children[new_parent].push_back(node);
    const double delta = new_cost - cost[node];
    // Depth-first cost propagation to the rewired subtree.
    std::vector<int> stack = {node};
    while (!stack.empty()) {
      const int n = stack.back();
      stack.pop_back();
      cost[n] += delta;
      for (int ch : children[n]) stack.push_back(ch);
    }
  }
};

BaseTrajectory assemble_trajectory(const Tree& tree, int goal_node,
                                   const PlanarPose& goal, const RrtConfig& config) {
  std::vector<Eigen::Vector2d> pts;
  for (int n = goal_node; n >= 0; n = tree.parent[n]) pts.push_back(tree.position[n]);
  std::reverse(pts.begin(), pts.end());
  const Eigen::Vector2d goal_xy(goal.x, goal.y);
  if ((pts.back() - goal_xy).norm() > 1e-12) pts.push_back(goal_xy);

  BaseTrajectory out;
  double length = 0.0;
  out.waypoints.push_back({0.0, pts[0].x(), pts[0].y(), 0.0});
  for (size_t i = 1; i < pts.size(); ++i) {
    const Eigen::Vector2d d = pts[i] - pts[i - 1];
    const double seg = d.norm();
    if (seg < 1e-12) continue;
    const double theta = std::atan2(d.y(), d.x());
    // Subdivide rewired long edges so downstream consumers can rely on a
    // spacing bound of one steer step.
    const int pieces = std::max(1, static_cast<int>(std::ceil(seg / config.steer_step)));
    for (int k = 1; k <= pieces; ++k) {
      const Eigen::Vector2d p = pts[i - 1] + d * (static_cast<double>(k) / pieces);
      length += seg / pieces;
      out.waypoints.push_back({length / config.nominal_speed, p.x(), p.y(), theta});
    }
  }
  // First heading follows the first segment; last carries the goal heading.
  if (out.waypoints.size() > 1) out.waypoints[0].theta = out.waypoints[1].theta;
  out.waypoints.back().theta = goal.theta;
  out.total_cost = length;
  return out;
}

}  // namespace

PlanResult rrt_star_plan(const OccupancyGrid& grid, const RobotFootprint& footprint,
                         const PlanarPose& start, const PlanarPose& goal,
                         const RrtConfig& config, uint64_t seed) {
  config.validate();
  footprint.validate();
  grid.validate();

  PlanResult result;
  const Eigen::Vector2i goal_cell = grid.cell_of(goal.x, goal.y);
  if (grid.in_bounds(goal_cell.x(), goal_cell.y()) &&
      grid.state(goal_cell.x(), goal_cell.y()) == CellState::kOccupied) {
    result.diagnostic = "goal cell is occupied";
    return result;
  }
  if (footprint_hits_occupied(grid, footprint, goal.x, goal.y, goal.theta)) {
    result.diagnostic = "goal footprint is in collision";
    return result;
  }
  if (footprint_hits_occupied(grid, footprint, start.x, start.y, start.theta)) {
    result.diagnostic = "start footprint is in collision";
    return result;
  }

  Rng rng(seed);
  Tree tree;
  tree.add(Eigen::Vector2d(start.x, start.y), -1, 0.0);

  const Eigen::Vector2d goal_xy(goal.x, goal.y);
  std::vector<int> goal_candidates;

  // Shrinking-ball rewiring radius constant for a 2D workspace, with the
  // whole (optimistically free) raster as the measure.
  const double area = (grid.max_x() - grid.min_x()) * (grid.max_y() - grid.min_y());
  const double gamma = 2.0 * std::sqrt(1.5 * area / M_PI);

  const auto t_start = std::chrono::steady_clock::now();
  int iterations = 0;
  for (; iterations < config.max_iterations; ++iterations) {
    if (config.time_budget_sec > 0.0) {
      const std::chrono::duration<double> elapsed =
          std::chrono::steady_clock::now() - t_start;
      if (elapsed.count() > config.time_budget_sec) break;
    }

    Eigen::Vector2d sample;
    if (rng.uniform01() < config.goal_bias) {
      sample = goal_xy;
    } else {
      sample.x() = rng.uniform(grid.min_x(), grid.max_x());
      sample.y() = rng.uniform(grid.min_y(), grid.max_y());
    }

    int nearest = 0;
    double best_d2 = (tree.position[0] - sample).squaredNorm();
    for (size_t i = 1; i < tree.position.size(); ++i) {
      const double d2 = (tree.position[i] - sample).squaredNorm();
      if (d2 < best_d2) {
        best_d2 = d2;
        nearest = static_cast<int>(i);
      }
    }

    const double dist = std::sqrt(best_d2);
    if (dist < 1e-9) continue;
    const Eigen::Vector2d reach =
        tree.position[nearest] +
        (sample - tree.position[nearest]) * (std::min(dist, config.steer_step) / dist);
    if (!edge_free(grid, footprint, tree.position[nearest], reach,
                   config.collision_check_spacing))
      continue;

    const size_t n = tree.position.size();
    const double radius =
        std::min(gamma * std::sqrt(std::log(static_cast<double>(n) + 1.0) /
                                   (static_cast<double>(n) + 1.0)),
                 4.0 * config.steer_step);

    // Choose the cheapest collision-free parent within the ball.
    int parent = nearest;
    double cost = tree.cost[nearest] + (reach - tree.position[nearest]).norm();
    std::vector<int> neighbors;
    for (size_t i = 0; i < n; ++i) {
      const double d = (tree.position[i] - reach).norm();
      if (d > radius) continue;
      neighbors.push_back(static_cast<int>(i));
      const double through = tree.cost[i] + d;
      if (through < cost &&
          edge_free(grid, footprint, tree.position[i], reach,
                    config.collision_check_spacing)) {
        parent = static_cast<int>(i);
        cost = through;
      }
    }
    const int node = tree.add(reach, parent, cost);

    // Rewire neighbors through the new node where that shortens them.
    for (int i : neighbors) {
      const double d = (tree.position[i] - reach).norm();
      const double through = cost + d;
      if (through + 1e-12 < tree.cost[i] &&
          edge_free(grid, footprint, reach, tree.position[i],
                    config.collision_check_spacing)) {
        tree.reparent(i, node, through);
      }
    }

    if ((reach - goal_xy).norm() <= config.goal_tolerance &&
        edge_free(grid, footprint, reach, goal_xy, config.collision_check_spacing)) {
      goal_candidates.push_back(node);
    }
  }
  result.iterations_used = iterations;

  if (goal_candidates.empty()) {
    result.diagnostic = "no path to goal within budget";
    return result;
  }
  int best = goal_candidates[0];
  double best_total = tree.cost[best] + (tree.position[best] - goal_xy).norm();
  for (int c : goal_candidates) {
    const double total = tree.cost[c] + (tree.position[c] - goal_xy).norm();
    if (total < best_total) {
      best_total = total;
      best = c;
    }
  }
  result.trajectory = assemble_trajectory(tree, best, goal, config);
  // Edge sweeps sample at finite spacing; re-check the exact emitted
  // waypoints so callers can rely on a clean check_trajectory at return.
  if (check_trajectory(grid, footprint, result.trajectory).has_value()) {
    result.trajectory = BaseTrajectory{};
    result.diagnostic = "assembled path failed the final collision check";
    return result;
  }
  result.ok = true;
  return result;
}

std::optional<size_t> check_trajectory(const OccupancyGrid& grid,
                                       const RobotFootprint& footprint,
                                       const BaseTrajectory& trajectory) {
  for (size_t i = 0; i < trajectory.waypoints.size(); ++i) {
    const auto& w = trajectory.waypoints[i];
    if (footprint_hits_occupied(grid, footprint, w.x, w.y, w.theta)) return i;
  }
  return std::nullopt;
}

PlanResult replan_on_collision(const OccupancyGrid& grid, const RobotFootprint& footprint,
                               const BaseTrajectory& current, size_t collision_index,
                               const PlanarPose& current_pose, const PlanarPose& goal,
                               const RrtConfig& config, uint64_t seed) {
  if (collision_index >= current.waypoints.size()) {
    PlanResult result;
    result.trajectory = current;
    result.ok = true;
    return result;
  }
  return rrt_star_plan(grid, footprint, current_pose, goal, config, seed);
}

void save_trajectory_csv(const std::string& path, const BaseTrajectory& trajectory) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open trajectory file for writing: " + path);
  out << "t,x,y,theta\n";
  char buf[160];
  for (const auto& w : trajectory.waypoints) {
    std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%.17g,%.17g\n", w.t, w.x, w.y, w.theta);
    out << buf;
  }
}

BaseTrajectory load_trajectory_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open trajectory file: " + path);
  std::string line;
  if (!std::getline(in, line) || line != "t,x,y,theta")
    throw std::runtime_error("trajectory csv missing header: " + path);
  BaseTrajectory out;
  size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    BaseTrajectory::Waypoint w;
    if (std::sscanf(line.c_str(), "%lf,%lf,%lf,%lf", &w.t, &w.x, &w.y, &w.theta) != 4)
      throw std::runtime_error("trajectory csv parse error at line " +
                               std::to_string(lineno));
    out.waypoints.push_back(w);
  }
  for (size_t i = 1; i < out.waypoints.size(); ++i) {
    const auto& a = out.waypoints[i - 1];
    const auto& b = out.waypoints[i];
    out.total_cost += std::hypot(b.x - a.x, b.y - a.y);
  }
  return out;
}

}  // namespace mobiman::planning
