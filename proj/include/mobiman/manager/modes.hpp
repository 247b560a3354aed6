#pragma once

#include <string>
#include <vector>

#include "mobiman/control/kinematic_model.hpp"
#include "mobiman/geometry/bvh.hpp"
#include "mobiman/geometry/pose.hpp"
#include "mobiman/localization/hal.hpp"
#include "mobiman/manager/task.hpp"

namespace mobiman::manager {

// Stages of one task visit, walked in order; Failed is reachable from any
// live stage and retries back into Navigate.
enum class ManagerMode {
  kNavigate,
  kWholeBodyApproach,
  kHalScan,
  kFinePosition,
  kExecute,
  kDone,
  kFailed,
};

const char* mode_name(ManagerMode mode);

// Forward one stage, any live stage to Failed, or Failed back to Navigate.
// Done absorbs.
bool legal_transition(ManagerMode from, ManagerMode to);

struct ModeThresholds {
  double d_nav = 2.0;  // planar tool distance beyond which the base drives
  double d_wb = 0.05;  // tool distance beyond which the whole body tracks

  void validate() const;
};

// Distance-based stage pick: beyond d_nav planar the base navigates, beyond
// d_wb in 3D the whole body approaches, inside both the scan stage begins.
ManagerMode select_mode(const geometry::Pose& tool, const geometry::Pose& target,
                        const ModeThresholds& thresholds = {});

// Scan viewpoints around a nominal end-effector pose: offsets of `magnitude`
// along the tool axes in triplets of alternating sign (a second pair of
// triplets moves out one more step), center orientation kept throughout.
struct ViewpointPlan {
  std::vector<geometry::Pose> viewpoints;  // end-effector poses, model frame
  bool ok = false;                         // at least three candidates survived
  std::string diagnostic;                  // one line per dropped candidate
};

// Candidates are dropped when the arm cannot reach them from `base_pose` or
// when any distance-sensor ray leaves its hinted reference surface in the
// as-planned model. Throws std::invalid_argument when count < 3: three
// independent rays are the floor for 3-DoF position observability.
ViewpointPlan plan_hal_viewpoints(const geometry::Pose& center_ee, int count,
                                  double magnitude, const Task& task,
                                  const geometry::Bvh& as_planned,
                                  const localization::RangefinderExtrinsics& ext,
                                  const control::KinematicModel& model,
                                  const geometry::Pose& base_pose,
                                  const Eigen::Matrix<double, 6, 1>& seed_joints);

}  // namespace mobiman::manager
