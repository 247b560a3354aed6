#include "mobiman/localization/icp.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <numeric>
#include <stdexcept>

#include "mobiman/geometry/kdtree.hpp"

namespace mobiman::localization {

void IcpConfig::validate() const {
  if (max_iterations < 1) throw std::runtime_error("icp: max_iterations must be >= 1");
  if (correspondence_radius <= 0.0) throw std::runtime_error("icp: radius must be > 0");
  if (outlier_trim_ratio < 0.0 || outlier_trim_ratio >= 1.0)
    throw std::runtime_error("icp: trim ratio must be in [0,1)");
}

namespace {

struct Correspondence {
  Eigen::Vector3d p;  // transformed scan point
  Eigen::Vector3d q;  // map point
  Eigen::Vector3d n;  // map normal
  double r;           // point-to-plane residual
};

// Mean |residual| over the kept (trimmed) correspondence set at pose T.
double evaluate(const geometry::SurfacePointCloud& scan, const geometry::SurfacePointCloud& map,
                const geometry::KdTree3& tree, const geometry::Pose& T, double radius,
                double trim_ratio, std::vector<Correspondence>* out) {
  std::vector<Correspondence> cs;
  cs.reserve(scan.points.size());
  for (const auto& sp : scan.points) {
    const Eigen::Vector3d p = T * sp;
    double d2 = 0.0;
    const int j = tree.nearest(p, radius, &d2);
    if (j < 0) continue;
    Correspondence c;
    c.p = p;
    c.q = map.points[j];
    c.n = map.normals[j];
    c.r = c.n.dot(c.p - c.q);
    cs.push_back(c);
  }
  if (!cs.empty() && trim_ratio > 0.0) {
    const size_t keep =
        std::max<size_t>(1, cs.size() - static_cast<size_t>(trim_ratio * cs.size()));
    std::nth_element(cs.begin(), cs.begin() + keep - 1, cs.end(),
                     [](const Correspondence& a, const Correspondence& b) {
                       return std::abs(a.r) < std::abs(b.r);
                     });
    cs.resize(keep);
  }
  double sum = 0.0;
  for (const auto& c : cs) sum += std::abs(c.r);
  const double mean = cs.empty() ? 0.0 : sum / cs.size();
  if (out) *out = std::move(cs);
  return mean;
}

}  // namespace

IcpResult icp_point_to_plane(const geometry::SurfacePointCloud& scan,
                             const geometry::SurfacePointCloud& map,
                             const geometry::Pose& init, const IcpConfig& cfg) {
  if (map.points.empty()) throw std::runtime_error("icp: empty cloud");
  return icp_point_to_plane(scan, map, geometry::KdTree3(map.points), init, cfg);
}

IcpResult icp_point_to_plane(const geometry::SurfacePointCloud& scan,
                             const geometry::SurfacePointCloud& map,
                             const geometry::KdTree3& tree, const geometry::Pose& init,
                             const IcpConfig& cfg) {
  cfg.validate();
  if (scan.points.empty() || map.points.empty())
    throw std::runtime_error("icp: empty cloud");

  IcpResult result;
  result.pose = init;

  geometry::Pose T = init;
  std::vector<Correspondence> cs;
  double current = evaluate(scan, map, tree, T, cfg.correspondence_radius,
                            cfg.outlier_trim_ratio, &cs);
  double lambda = 1e-6;

  for (int iter = 0; iter < cfg.max_iterations; ++iter) {
    if (cs.size() < 6) {
      result.pose = init;
      result.converged = false;
      result.iterations_used = iter;
      result.matched_fraction = static_cast<double>(cs.size()) / scan.points.size();
      result.mean_residual = current;
      return result;
    }

    // Gauss-Newton on r_k = n . (exp(dw) p + dt - q); J = [n^T, (p x n)^T].
    Eigen::Matrix<double, 6, 6> H = Eigen::Matrix<double, 6, 6>::Zero();
    Eigen::Matrix<double, 6, 1> g = Eigen::Matrix<double, 6, 1>::Zero();
    for (const auto& c : cs) {
      Eigen::Matrix<double, 6, 1> J;
      J.head<3>() = c.n;
      J.tail<3>() = c.p.cross(c.n);
      H += J * J.transpose();
      g += J * c.r;
    }

    bool stepped = false;
    geometry::Vector6d delta = geometry::Vector6d::Zero();
    for (int attempt = 0; attempt < 8; ++attempt) {
      Eigen::Matrix<double, 6, 6> Hd = H;
      Hd.diagonal().array() += lambda * H.diagonal().array().maxCoeff() + 1e-12;
      delta = -Hd.ldlt().solve(g);
      geometry::Pose T_try = geometry::boxplus(T, delta);
      std::vector<Correspondence> cs_try;
      const double cost_try = evaluate(scan, map, tree, T_try, cfg.correspondence_radius,
                                       cfg.outlier_trim_ratio, &cs_try);
      // Accept only improving steps to keep the residual non-increasing.
      if (cost_try <= current && cs_try.size() >= 6) {
        T = T_try;
        current = cost_try;
        cs = std::move(cs_try);
        lambda = std::max(lambda * 0.5, 1e-9);
        stepped = true;
        break;
      }
      lambda *= 10.0;
    }

    result.iterations_used = iter + 1;
    result.residual_history.push_back(current);

    if (!stepped) {
      // No improving step exists at this damping range: stationary point.
      result.converged = true;
      break;
    }
    if (delta.head<3>().norm() < cfg.convergence_translation &&
        delta.tail<3>().norm() < cfg.convergence_rotation) {
      result.converged = true;
      break;
    }
  }

  result.pose = T;
  result.mean_residual = current;
  // Matched fraction reported against the untrimmed correspondence count.
  size_t matched = 0;
  for (const auto& sp : scan.points) {
    const Eigen::Vector3d p = T * sp;
    double d2 = 0.0;
    if (tree.nearest(p, cfg.correspondence_radius, &d2) >= 0) ++matched;
  }
  result.matched_fraction = static_cast<double>(matched) / scan.points.size();
  return result;
}

}  // namespace mobiman::localization
