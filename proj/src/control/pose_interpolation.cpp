#include "mobiman/control/pose_interpolation.hpp"

#include <stdexcept>

namespace mobiman::control {

std::vector<TimedPose> make_pose_path(const geometry::Pose& start,
                                      const geometry::Pose& end, double duration,
                                      double dt) {
  if (!(duration > 0.0) || !(dt > 0.0))
    throw std::runtime_error("pose path needs positive duration and dt");
  std::vector<TimedPose> path;
  const int n = std::max(1, static_cast<int>(std::ceil(duration / dt)));
  path.reserve(n + 1);
  for (int i = 0; i <= n; ++i) {
    const double t = std::min(duration, dt * i);
    path.push_back({t, interpolate_pose(start, end, quintic_profile(t / duration))});
  }
  return path;
}

}  // namespace mobiman::control
