#pragma once

#include <string>
#include <vector>

#include "mobiman/estimation/types.hpp"

namespace mobiman::estimation {

// Line-delimited measurement records, written by the simulator and replayed
// bit-exactly (values serialized with %.17g survive the double round-trip):
//   <t> pose_update <px py pz qw qx qy qz> [sigma_pos sigma_rot]
//   <t> wheel_odometry <wl wr>
//   <t> imu <wx wy wz fx fy fz>
void write_measurement_log(const std::string& path,
                           const std::vector<Measurement>& measurements);
std::vector<Measurement> read_measurement_log(const std::string& path);

}  // namespace mobiman::estimation
