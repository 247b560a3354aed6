#include "mobiman/localization/extrinsics_io.hpp"

#include <stdexcept>

#include "mobiman/common/config.hpp"

namespace mobiman::localization {

RangefinderExtrinsics load_extrinsics(const std::string& path) {
  const Config cfg = Config::from_file(path);
  const int count = cfg.group_count("sensor");
  if (count < 1) throw std::runtime_error("extrinsics: no sensors in " + path);
  RangefinderExtrinsics ext;
  for (int i = 0; i < count; ++i) {
    const std::string prefix = "sensor." + std::to_string(i) + ".";
    ext.sensor_in_ee.emplace_back(cfg.get_vec3(prefix + "translation"),
                                  cfg.get_quat(prefix + "quaternion"));
  }
  ext.validate();
  return ext;
}

void save_extrinsics(const std::string& path, const RangefinderExtrinsics& ext) {
  ext.validate();
  Config cfg;
  for (size_t i = 0; i < ext.sensor_in_ee.size(); ++i) {
    const std::string prefix = "sensor." + std::to_string(i) + ".";
    const auto& pose = ext.sensor_in_ee[i];
    cfg.set_vec(prefix + "translation",
                {pose.position.x(), pose.position.y(), pose.position.z()});
    cfg.set_vec(prefix + "quaternion",
                {pose.orientation.w(), pose.orientation.x(), pose.orientation.y(),
                 pose.orientation.z()});
  }
  cfg.save(path);
}

}  // namespace mobiman::localization
