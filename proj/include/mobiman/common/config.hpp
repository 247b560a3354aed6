#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>
#include <map>
#include <string>
#include <vector>

namespace mobiman {

// Line-oriented "key = value" files. Keys are dot-separated paths
// (e.g. "noise.lidar_sigma"), values are scalars, words, or
// whitespace-separated number lists. '#' starts a comment. This one format
// backs scenario, task, extrinsics and kinematic-model files.
class Config {
 public:
  Config() = default;

  static Config from_file(const std::string& path);
  static Config from_string(const std::string& text);

  bool has(const std::string& key) const { return values_.count(key) != 0; }

  std::string get_string(const std::string& key) const;
  std::string get_string(const std::string& key, const std::string& fallback) const;
  double get_double(const std::string& key) const;
  double get_double(const std::string& key, double fallback) const;
  int get_int(const std::string& key) const;
  int get_int(const std::string& key, int fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;
  std::vector<double> get_doubles(const std::string& key) const;
  Eigen::Vector3d get_vec3(const std::string& key) const;
  Eigen::Vector3d get_vec3(const std::string& key, const Eigen::Vector3d& fallback) const;
  // Quaternions are written w x y z.
  Eigen::Quaterniond get_quat(const std::string& key) const;

  void set(const std::string& key, const std::string& value);
  void set_double(const std::string& key, double value);
  void set_vec(const std::string& key, const std::vector<double>& values);

  // Keys sharing `prefix.`; returned without the prefix.
  std::vector<std::string> keys_with_prefix(const std::string& prefix) const;
  // Number of entries in an indexed group, i.e. largest i with "prefix.i.*" plus one.
  int group_count(const std::string& prefix) const;

  void save(const std::string& path) const;

  const std::map<std::string, std::string>& values() const { return values_; }

 private:
  std::string require(const std::string& key) const;
  std::map<std::string, std::string> values_;
};

}  // namespace mobiman
