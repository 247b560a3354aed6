#include "mobiman/localization/hal.hpp"

#include <Eigen/Dense>
#include <fstream>
#include <stdexcept>

#include "mobiman/localization/cauchy.hpp"

namespace mobiman::localization {

void RangefinderExtrinsics::validate() const {
  if (sensor_in_ee.empty()) throw std::runtime_error("extrinsics: need at least 1 sensor");
  for (const auto& pose : sensor_in_ee)
    if (std::abs(pose.orientation.norm() - 1.0) > 1e-6)
      throw std::runtime_error("extrinsics: non-unit quaternion");
}

void HalObservationSet::validate(size_t sensor_count) const {
  if (viewpoints.empty()) throw std::runtime_error("hal: no viewpoints");
  for (const auto& vp : viewpoints) {
    if (vp.distances.size() != sensor_count)
      throw std::runtime_error("hal: distance count does not match sensor count");
    for (double z : vp.distances)
      if (!(z > 0.0)) throw std::runtime_error("hal: distances must be > 0");
  }
}

void HalConfig::validate() const {
  if (outer_iterations < 1) throw std::runtime_error("hal: outer_iterations must be >= 1");
  if (max_inner_iterations < 1)
    throw std::runtime_error("hal: max_inner_iterations must be >= 1");
  if (cauchy_scale <= 0.0) throw std::runtime_error("hal: cauchy_scale must be > 0");
}

namespace {

// Plane retrieved for one (viewpoint, sensor) ray, with the factors of the
// expected-distance expression cached. For a fixed plane the expected
// distance is affine in the ray origin, hence in the base position.
struct RetrievedPlane {
  int viewpoint = 0;
  int sensor = 0;
  double measured = 0.0;
  Eigen::Vector3d support = Eigen::Vector3d::Zero();
  Eigen::Vector3d normal = Eigen::Vector3d::UnitZ();
  Eigen::Vector3d origin = Eigen::Vector3d::Zero();     // ray origin at retrieval
  double denom = 1.0;                                   // dir . normal
};

// Expected distance along the sensor ray to the plane: ((t_p - o) . n) / (d . n).
double expected_distance(const RetrievedPlane& pl, const Eigen::Vector3d& origin) {
  return (pl.support - origin).dot(pl.normal) / pl.denom;
}

std::vector<RetrievedPlane> retrieve_planes(const Eigen::Vector3d& base_position,
                                            const HalObservationSet& obs,
                                            const RangefinderExtrinsics& ext,
                                            const geometry::Bvh& model, int* misses) {
  const geometry::Pose base(base_position, obs.base_guess.orientation);
  std::vector<RetrievedPlane> planes;
  *misses = 0;
  for (size_t i = 0; i < obs.viewpoints.size(); ++i) {
    const geometry::Pose ee = geometry::compose(base, obs.viewpoints[i].ee_in_base);
    for (size_t s = 0; s < ext.sensor_in_ee.size(); ++s) {
      const geometry::Pose sensor = geometry::compose(ee, ext.sensor_in_ee[s]);
      const Eigen::Vector3d dir = sensor.orientation * Eigen::Vector3d::UnitX();
      const auto hit = model.raytrace(geometry::Ray(sensor.position, dir));
      if (!hit) {
        ++*misses;
        continue;
      }
      RetrievedPlane pl;
      pl.viewpoint = static_cast<int>(i);
      pl.sensor = static_cast<int>(s);
      pl.measured = obs.viewpoints[i].distances[s];
      pl.support = hit->plane_support;
      pl.normal = hit->plane_normal;
      pl.origin = sensor.position;
      pl.denom = dir.dot(hit->plane_normal);
      planes.push_back(pl);
    }
  }
  return planes;
}

// Cost, gradient and records for a fixed plane set. The ray origin moves
// one-to-one with the base position (orientation fixed), so
// d r / d p = n^T / (d . n) for each measurement.
void evaluate_planes(const std::vector<RetrievedPlane>& planes,
                     const Eigen::Vector3d& base_position,
                     const Eigen::Vector3d& retrieval_position, double scale,
                     double inlier_threshold, HalEvaluation* out) {
  out->measurements.clear();
  out->cost = 0.0;
  out->gradient.setZero();
  for (const auto& pl : planes) {
    const Eigen::Vector3d origin = pl.origin + (base_position - retrieval_position);
    const double expected = expected_distance(pl, origin);
    const double r = pl.measured - expected;
    out->cost += cauchy(r, scale);
    // d r / d p = -d expected / d origin = n / (d . n).
    out->gradient += cauchy_derivative(r, scale) * (pl.normal / pl.denom);

    HalMeasurement m;
    m.viewpoint = pl.viewpoint;
    m.sensor = pl.sensor;
    m.measured = pl.measured;
    m.expected = expected;
    m.residual = r;
    m.inlier = std::abs(r) <= inlier_threshold * scale;
    m.hit = true;
    out->measurements.push_back(m);
  }
}

}  // namespace

HalEvaluation hal_residual(const Eigen::Vector3d& base_position,
                           const HalObservationSet& obs, const RangefinderExtrinsics& ext,
                           const geometry::Bvh& model, double cauchy_scale,
                           double inlier_threshold) {
  ext.validate();
  obs.validate(ext.sensor_in_ee.size());
  HalEvaluation eval;
  const auto planes = retrieve_planes(base_position, obs, ext, model, &eval.misses);
  if (planes.empty())
    throw std::runtime_error("hal: all rays miss the model (model/pose mismatch)");
  evaluate_planes(planes, base_position, base_position, cauchy_scale, inlier_threshold,
                  &eval);
  return eval;
}

HalResult hal_localize(const HalObservationSet& obs, const RangefinderExtrinsics& ext,
                       const geometry::Bvh& model, const HalConfig& cfg) {
  cfg.validate();
  ext.validate();
  obs.validate(ext.sensor_in_ee.size());

  HalResult result;
  result.orientation = obs.base_guess.orientation;

  Eigen::Vector3d position = obs.base_guess.position;
  Eigen::Vector3d best_position = position;
  double best_cost = std::numeric_limits<double>::infinity();
  double previous_outer_cost = std::numeric_limits<double>::infinity();
  int cost_increases = 0;

  for (int outer = 0; outer < cfg.outer_iterations; ++outer) {
    result.outer_iterations_used = outer + 1;
    int misses = 0;
    const auto planes = retrieve_planes(position, obs, ext, model, &misses);
    if (planes.empty())
      throw std::runtime_error("hal: all rays miss the model (model/pose mismatch)");
    const Eigen::Vector3d retrieval_position = position;

    HalEvaluation eval;
    evaluate_planes(planes, position, retrieval_position, cfg.cauchy_scale,
                    cfg.inlier_threshold, &eval);
    double cost = eval.cost;
    double lambda = 1e-8;

    // Damped Gauss-Newton over the 3 position variables with IRLS weights.
    for (int inner = 0; inner < cfg.max_inner_iterations; ++inner) {
      Eigen::Matrix3d H = Eigen::Matrix3d::Zero();
      Eigen::Vector3d g = Eigen::Vector3d::Zero();
      for (const auto& pl : planes) {
        const Eigen::Vector3d origin = pl.origin + (position - retrieval_position);
        const double r = pl.measured - expected_distance(pl, origin);
        const Eigen::Vector3d J = pl.normal / pl.denom;  // d r / d p
        const double w = cauchy_weight(r, cfg.cauchy_scale);
        H += w * J * J.transpose();
        g += w * r * J;
      }
      bool stepped = false;
      for (int attempt = 0; attempt < 10; ++attempt) {
        Eigen::Matrix3d Hd = H;
        Hd.diagonal().array() += lambda;
        const Eigen::Vector3d delta = -Hd.ldlt().solve(g);
        HalEvaluation trial;
        evaluate_planes(planes, position + delta, retrieval_position, cfg.cauchy_scale,
                        cfg.inlier_threshold, &trial);
        if (trial.cost < cost) {
          position += delta;
          cost = trial.cost;
          lambda = std::max(lambda * 0.5, 1e-12);
          stepped = true;
          if (delta.norm() < 1e-12) inner = cfg.max_inner_iterations;
          break;
        }
        lambda *= 10.0;
      }
      if (!stepped) break;
    }

    if (cost < best_cost) {
      best_cost = cost;
      best_position = position;
    }
    if (cost > previous_outer_cost) {
      if (++cost_increases >= 3) {
        result.position = best_position;
        result.cost = best_cost;
        result.converged = false;
        result.diagnostic = "diverged: outer cost increased 3 times";
        HalEvaluation final_eval = hal_residual(result.position, obs, ext, model,
                                                cfg.cauchy_scale, cfg.inlier_threshold);
        result.measurements = final_eval.measurements;
        return result;
      }
    } else {
      cost_increases = 0;
    }
    previous_outer_cost = cost;
  }

  result.position = best_position;
  result.cost = best_cost;
  result.converged = true;
  HalEvaluation final_eval =
      hal_residual(result.position, obs, ext, model, cfg.cauchy_scale, cfg.inlier_threshold);
  result.measurements = final_eval.measurements;
  result.cost = final_eval.cost;
  return result;
}

void write_hal_diag_log(const std::string& path, const HalResult& result) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("hal: cannot open diag log " + path);
  out.precision(17);
  for (const auto& m : result.measurements) {
    out << "measurement viewpoint=" << m.viewpoint << " sensor=" << m.sensor
        << " measured=" << m.measured << " expected=" << m.expected
        << " residual=" << m.residual << " inlier=" << (m.inlier ? 1 : 0) << "\n";
  }
  out << "summary cost=" << result.cost
      << " outer_iterations=" << result.outer_iterations_used
      << " converged=" << (result.converged ? 1 : 0);
  if (!result.diagnostic.empty()) out << " diagnostic=\"" << result.diagnostic << "\"";
  out << "\n";
}

}  // namespace mobiman::localization
