#pragma once

#include <vector>

#include "mobiman/geometry/pose.hpp"

namespace mobiman::control {

// Quintic time-scaling profile: s(0) = 0, s(1) = 1 with zero velocity and
// acceleration at both ends.
inline double quintic_profile(double t) {
  const double u = std::clamp(t, 0.0, 1.0);
  return u * u * u * (10.0 + u * (-15.0 + 6.0 * u));
}

// Pose at interpolation parameter s: linear in position, SLERP in
// orientation.
inline geometry::Pose interpolate_pose(const geometry::Pose& start,
                                       const geometry::Pose& end, double s) {
  return geometry::Pose(start.position + s * (end.position - start.position),
                        start.orientation.slerp(s, end.orientation));
}

struct TimedPose {
  double t = 0.0;
  geometry::Pose pose;
};

// Quintic-profiled path from start to end over `duration`, sampled every
// `dt`; rest-to-rest by construction. Throws std::runtime_error on
// nonpositive duration or dt.
std::vector<TimedPose> make_pose_path(const geometry::Pose& start,
                                      const geometry::Pose& end, double duration,
                                      double dt);

}  // namespace mobiman::control
