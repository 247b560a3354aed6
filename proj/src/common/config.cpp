#include "mobiman/common/config.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace mobiman {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

}  // namespace

Config Config::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("config: cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  try {
    return from_string(ss.str());
  } catch (const std::runtime_error& e) {
    throw std::runtime_error(path + ": " + e.what());
  }
}

Config Config::from_string(const std::string& text) {
  Config cfg;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::runtime_error("config: line " + std::to_string(lineno) + " has no '='");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty())
      throw std::runtime_error("config: line " + std::to_string(lineno) + " has empty key");
    cfg.values_[key] = value;
  }
  return cfg;
}

std::string Config::require(const std::string& key) const {
  const auto it = values_.find(key);
  if (it == values_.end()) throw std::runtime_error("config: missing key '" + key + "'");
  return it->second;
}

std::string Config::get_string(const std::string& key) const { return require(key); }

std::string Config::get_string(const std::string& key, const std::string& fallback) const {
  const auto it = values_.find(key);
  return it == values_.end() ? fallback : it->second;
}

double Config::get_double(const std::string& key) const {
  const std::string v = require(key);
  size_t pos = 0;
  const double d = std::stod(v, &pos);
  if (pos == 0) throw std::runtime_error("config: key '" + key + "' is not a number");
  return d;
}

double Config::get_double(const std::string& key, double fallback) const {
  return has(key) ? get_double(key) : fallback;
}

int Config::get_int(const std::string& key) const { return static_cast<int>(get_double(key)); }

int Config::get_int(const std::string& key, int fallback) const {
  return has(key) ? get_int(key) : fallback;
}

bool Config::get_bool(const std::string& key, bool fallback) const {
  if (!has(key)) return fallback;
  const std::string v = get_string(key);
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw std::runtime_error("config: key '" + key + "' is not a bool");
}

std::vector<double> Config::get_doubles(const std::string& key) const {
  std::istringstream in(require(key));
  std::vector<double> out;
  double d;
  while (in >> d) out.push_back(d);
  return out;
}

Eigen::Vector3d Config::get_vec3(const std::string& key) const {
  const auto v = get_doubles(key);
  if (v.size() != 3) throw std::runtime_error("config: key '" + key + "' needs 3 numbers");
  return Eigen::Vector3d(v[0], v[1], v[2]);
}

Eigen::Vector3d Config::get_vec3(const std::string& key, const Eigen::Vector3d& fallback) const {
  return has(key) ? get_vec3(key) : fallback;
}

Eigen::Quaterniond Config::get_quat(const std::string& key) const {
  const auto v = get_doubles(key);
  if (v.size() != 4) throw std::runtime_error("config: key '" + key + "' needs 4 numbers (w x y z)");
  Eigen::Quaterniond q(v[0], v[1], v[2], v[3]);
  if (std::abs(q.norm() - 1.0) > 1e-6)
    throw std::runtime_error("config: key '" + key + "' is not a unit quaternion");
  q.normalize();
  return q;
}

void Config::set(const std::string& key, const std::string& value) { values_[key] = value; }

void Config::set_double(const std::string& key, double value) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", value);
  values_[key] = buf;
}

void Config::set_vec(const std::string& key, const std::vector<double>& values) {
  std::string out;
  char buf[32];
  for (size_t i = 0; i < values.size(); ++i) {
    std::snprintf(buf, sizeof(buf), "%.17g", values[i]);
    if (i) out += ' ';
    out += buf;
  }
  values_[key] = out;
}

std::vector<std::string> Config::keys_with_prefix(const std::string& prefix) const {
  const std::string p = prefix + ".";
  std::vector<std::string> out;
  for (const auto& [k, v] : values_)
    if (k.rfind(p, 0) == 0) out.push_back(k.substr(p.size()));
  return out;
}

int Config::group_count(const std::string& prefix) const {
  int count = 0;
  for (const auto& key : keys_with_prefix(prefix)) {
    const auto dot = key.find('.');
    const std::string idx = dot == std::string::npos ? key : key.substr(0, dot);
    try {
      count = std::max(count, std::stoi(idx) + 1);
    } catch (...) {
    }
  }
  return count;
}

void Config::save(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("config: cannot write " + path);
  for (const auto& [k, v] : values_) out << k << " = " << v << "\n";
}

}  // namespace mobiman
