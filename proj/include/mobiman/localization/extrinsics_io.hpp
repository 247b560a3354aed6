#pragma once

#include <string>

#include "mobiman/localization/hal.hpp"

namespace mobiman::localization {

// Plain-text key/value extrinsics file:
//   sensor.<i>.translation = x y z
//   sensor.<i>.quaternion  = w x y z
RangefinderExtrinsics load_extrinsics(const std::string& path);
void save_extrinsics(const std::string& path, const RangefinderExtrinsics& ext);

}  // namespace mobiman::localization
