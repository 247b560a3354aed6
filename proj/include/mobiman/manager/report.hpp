#pragma once

#include <Eigen/Core>
#include <limits>
#include <string>
#include <vector>

namespace mobiman::manager {

// Timestamp of one mode entry, simulation clock.
struct ModeStamp {
  std::string mode;
  double time = 0.0;
};

// Outcome of one dot of one task visit. Positions are model-frame tool
// positions; `executed` is ground truth from the simulator at mark time.
struct DotRecord {
  std::string task_id;
  int cycle = 0;
  int dot = 0;
  Eigen::Vector3d commanded = Eigen::Vector3d::Zero();
  Eigen::Vector3d executed =
      Eigen::Vector3d::Constant(std::numeric_limits<double>::quiet_NaN());
  bool done = false;
  // Mode the visit died in; empty when done.
  std::string failed_stage;
  // Magnitude of the scan-based correction applied before fine positioning.
  double hal_error_m = std::numeric_limits<double>::quiet_NaN();
  int replans = 0;
  // Mode entries in order; the last one is Done or Failed.
  std::vector<ModeStamp> mode_trace;

  Eigen::Vector3d deviation() const { return executed - commanded; }
  double abs_error_m() const { return deviation().norm(); }
  double t_start() const { return mode_trace.empty() ? 0.0 : mode_trace.front().time; }
  double t_end() const { return mode_trace.empty() ? 0.0 : mode_trace.back().time; }
};

// All dots of a run plus the two aggregate accuracy numbers.
struct RunReport {
  std::vector<DotRecord> dots;

  int failed_count() const;
  // Mean norm of executed-commanded over dots that finished.
  double mean_abs_error_m() const;
  // Deviations are grouped per task id (a revisited task accumulates dots
  // across cycles); within each group every pair contributes
  // |d_i - d_j|, and the mean runs over all pairs of all groups. NaN when
  // no group has two finished dots.
  double mean_relative_error_m() const;
};

void write_report_csv(const std::string& path, const RunReport& report);
RunReport read_report_csv(const std::string& path);

// Human-readable digest: totals, aggregate errors, per-task lines.
std::string summarize(const RunReport& report);

}  // namespace mobiman::manager
