#include "mobiman/manager/task.hpp"

#include <stdexcept>

#include "mobiman/common/config.hpp"

namespace mobiman::manager {

geometry::Pose Task::dot_pose(size_t index) const {
  if (pattern.empty()) {
    if (index != 0) throw std::runtime_error("task has a single dot");
    return target;
  }
  if (index >= pattern.size()) throw std::runtime_error("dot index out of range");
  return geometry::Pose(target.position + target.orientation * pattern[index],
                        target.orientation);
}

void Task::validate() const {
  if (id.empty()) throw std::runtime_error("task id must not be empty");
  for (const auto& n : hint_normals)
    if (std::abs(n.norm() - 1.0) > 1e-6)
      throw std::runtime_error("task hint normals must be unit length");
  if (!(hint_max_distance > 0.0))
    throw std::runtime_error("task hint distance must be positive");
}

std::vector<Eigen::Vector3d> grid_pattern(int n, double spacing) {
  if (n < 1 || !(spacing > 0.0)) throw std::runtime_error("bad grid pattern");
  std::vector<Eigen::Vector3d> out;
  const double half = 0.5 * (n - 1);
  for (int iy = 0; iy < n; ++iy)
    for (int iz = 0; iz < n; ++iz)
      out.emplace_back(0.0, (iy - half) * spacing, (iz - half) * spacing);
  return out;
}

std::vector<Task> load_tasks(const std::string& path) {
  const Config cfg = Config::from_file(path);
  std::vector<Task> tasks;
  const int n = cfg.group_count("task");
  if (n == 0) throw std::runtime_error("task file defines no tasks: " + path);
  for (int i = 0; i < n; ++i) {
    const std::string p = "task." + std::to_string(i);
    Task t;
    t.id = cfg.get_string(p + ".id");
    t.target =
        geometry::Pose(cfg.get_vec3(p + ".target.translation"),
                       cfg.get_quat(p + ".target.quaternion").normalized());

    const std::string pattern = cfg.get_string(p + ".pattern", "single");
    if (pattern == "grid3x3") {
      t.pattern = grid_pattern(3, cfg.get_double(p + ".pattern_spacing", 0.05));
    } else if (pattern == "offsets") {
      const int k = cfg.group_count(p + ".offset");
      for (int j = 0; j < k; ++j)
        t.pattern.push_back(cfg.get_vec3(p + ".offset." + std::to_string(j)));
    } else if (pattern != "single") {
      throw std::runtime_error("unknown task pattern: " + pattern);
    }

    const int h = cfg.group_count(p + ".hint");
    for (int j = 0; j < h; ++j)
      t.hint_normals.push_back(
          cfg.get_vec3(p + ".hint." + std::to_string(j)).normalized());
    t.hint_max_distance = cfg.get_double(p + ".hint_max_distance", 30.0);

    t.validate();
    tasks.push_back(std::move(t));
  }
  return tasks;
}

void save_tasks(const std::string& path, const std::vector<Task>& tasks) {
  Config cfg;
  for (size_t i = 0; i < tasks.size(); ++i) {
    const Task& t = tasks[i];
    t.validate();
    const std::string p = "task." + std::to_string(i);
    cfg.set(p + ".id", t.id);
    cfg.set_vec(p + ".target.translation",
                {t.target.position.x(), t.target.position.y(), t.target.position.z()});
    cfg.set_vec(p + ".target.quaternion",
                {t.target.orientation.w(), t.target.orientation.x(),
                 t.target.orientation.y(), t.target.orientation.z()});
    if (!t.pattern.empty()) {
      cfg.set(p + ".pattern", "offsets");
      for (size_t j = 0; j < t.pattern.size(); ++j)
        cfg.set_vec(p + ".offset." + std::to_string(j),
                    {t.pattern[j].x(), t.pattern[j].y(), t.pattern[j].z()});
    }
    for (size_t j = 0; j < t.hint_normals.size(); ++j)
      cfg.set_vec(p + ".hint." + std::to_string(j),
                  {t.hint_normals[j].x(), t.hint_normals[j].y(), t.hint_normals[j].z()});
    cfg.set_double(p + ".hint_max_distance", t.hint_max_distance);
  }
  cfg.save(path);
}

}  // namespace mobiman::manager
