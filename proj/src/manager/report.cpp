#include "mobiman/manager/report.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

namespace mobiman::manager {
namespace {

// Pairwise deviation distances pooled across groups. Returns {sum, pairs}.
std::pair<double, long> pairwise_sums(const std::vector<DotRecord>& dots) {
  std::map<std::string, std::vector<Eigen::Vector3d>> groups;
  for (const auto& d : dots)
    if (d.done) groups[d.task_id].push_back(d.deviation());
  double sum = 0.0;
  long pairs = 0;
  for (const auto& [id, devs] : groups)
    for (size_t i = 0; i < devs.size(); ++i)
      for (size_t j = i + 1; j < devs.size(); ++j) {
        sum += (devs[i] - devs[j]).norm();
        ++pairs;
      }
  return {sum, pairs};
}

std::string encode_trace(const std::vector<ModeStamp>& trace) {
  std::string out;
  char buf[96];
  for (const auto& s : trace) {
    std::snprintf(buf, sizeof(buf), "%s%s@%.17g", out.empty() ? "" : ";",
                  s.mode.c_str(), s.time);
    out += buf;
  }
  return out;
}

std::vector<ModeStamp> decode_trace(const std::string& text) {
  std::vector<ModeStamp> trace;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ';')) {
    const auto at = item.rfind('@');
    if (at == std::string::npos)
      throw std::runtime_error("report csv: bad mode stamp " + item);
    trace.push_back({item.substr(0, at), std::stod(item.substr(at + 1))});
  }
  return trace;
}

std::vector<std::string> split_csv(const std::string& line, size_t expected) {
  std::vector<std::string> fields;
  std::stringstream ss(line);
  std::string item;
  while (std::getline(ss, item, ',')) fields.push_back(item);
  // A line ending in ',' has an empty trailing field getline drops.
  while (fields.size() < expected) fields.emplace_back();
  if (fields.size() != expected)
    throw std::runtime_error("report csv: expected " + std::to_string(expected) +
                             " fields, got " + std::to_string(fields.size()));
  return fields;
}

constexpr const char* kHeader =
    "task_id,cycle,dot,done,failed_stage,cmd_x,cmd_y,cmd_z,exe_x,exe_y,exe_z,"
    "abs_error_mm,hal_error_m,replans,mode_trace";

}  // namespace

int RunReport::failed_count() const {
  int n = 0;
  for (const auto& d : dots) n += d.done ? 0 : 1;
  return n;
}

double RunReport::mean_abs_error_m() const {
  double sum = 0.0;
  int n = 0;
  for (const auto& d : dots)
    if (d.done) {
      sum += d.abs_error_m();
      ++n;
    }
  return n == 0 ? std::numeric_limits<double>::quiet_NaN() : sum / n;
}

double RunReport::mean_relative_error_m() const {
  const auto [sum, pairs] = pairwise_sums(dots);
  return pairs == 0 ? std::numeric_limits<double>::quiet_NaN() : sum / pairs;
}

void write_report_csv(const std::string& path, const RunReport& report) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open report file for writing: " + path);
  out << kHeader << "\n";
  char buf[512];
  for (const auto& d : report.dots) {
    if (d.task_id.find(',') != std::string::npos ||
        d.failed_stage.find(',') != std::string::npos)
      throw std::runtime_error("report csv: field contains a comma");
    std::snprintf(buf, sizeof(buf),
                  "%s,%d,%d,%d,%s,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%d,",
                  d.task_id.c_str(), d.cycle, d.dot, d.done ? 1 : 0,
                  d.failed_stage.c_str(), d.commanded.x(), d.commanded.y(),
                  d.commanded.z(), d.executed.x(), d.executed.y(), d.executed.z(),
                  1e3 * d.abs_error_m(), d.hal_error_m, d.replans);
    out << buf << encode_trace(d.mode_trace) << "\n";
  }
}

RunReport read_report_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open report file: " + path);
  std::string line;
  if (!std::getline(in, line) || line != kHeader)
    throw std::runtime_error("report csv missing header: " + path);
  RunReport report;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto f = split_csv(line, 15);
    DotRecord d;
    d.task_id = f[0];
    d.cycle = std::stoi(f[1]);
    d.dot = std::stoi(f[2]);
    d.done = std::stoi(f[3]) != 0;
    d.failed_stage = f[4];
    d.commanded = {std::stod(f[5]), std::stod(f[6]), std::stod(f[7])};
    d.executed = {std::stod(f[8]), std::stod(f[9]), std::stod(f[10])};
    // f[11] is the derived abs_error_mm column; the positions carry it.
    d.hal_error_m = std::stod(f[12]);
    d.replans = std::stoi(f[13]);
    d.mode_trace = decode_trace(f[14]);
    report.dots.push_back(std::move(d));
  }
  return report;
}

std::string summarize(const RunReport& report) {
  std::ostringstream out;
  const int failed = report.failed_count();
  const int total = static_cast<int>(report.dots.size());
  char buf[160];
  std::snprintf(buf, sizeof(buf), "dots: %d total, %d done, %d failed\n", total,
                total - failed, failed);
  out << buf;
  const double abs_m = report.mean_abs_error_m();
  const double rel_m = report.mean_relative_error_m();
  if (std::isnan(abs_m))
    out << "mean absolute error: n/a\n";
  else {
    std::snprintf(buf, sizeof(buf), "mean absolute error: %.2f mm\n", 1e3 * abs_m);
    out << buf;
  }
  if (std::isnan(rel_m))
    out << "mean pairwise relative error: n/a\n";
  else {
    std::snprintf(buf, sizeof(buf), "mean pairwise relative error: %.2f mm\n",
                  1e3 * rel_m);
    out << buf;
  }
  // Per-task lines reuse the aggregate math on a filtered copy.
  std::map<std::string, RunReport> by_task;
  for (const auto& d : report.dots) by_task[d.task_id].dots.push_back(d);
  for (const auto& [id, sub] : by_task) {
    const int sub_total = static_cast<int>(sub.dots.size());
    const int sub_done = sub_total - sub.failed_count();
    const double a = sub.mean_abs_error_m();
    const double r = sub.mean_relative_error_m();
    std::snprintf(buf, sizeof(buf), "task %s: %d/%d done", id.c_str(), sub_done,
                  sub_total);
    out << buf;
    if (!std::isnan(a)) {
      std::snprintf(buf, sizeof(buf), ", abs %.2f mm", 1e3 * a);
      out << buf;
    }
    if (!std::isnan(r)) {
      std::snprintf(buf, sizeof(buf), ", rel %.2f mm", 1e3 * r);
      out << buf;
    }
    out << "\n";
  }
  return out.str();
}

}  // namespace mobiman::manager
