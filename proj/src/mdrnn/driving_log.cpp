#include "highway_rl/mdrnn/driving_log.hpp"

#include <cmath>

#include "highway_rl/csv.hpp"
#include "highway_rl/errors.hpp"
#include "highway_rl/sim/action.hpp"

namespace highway_rl::mdrnn {

void DrivingLog::append(LogRecord r) {
  if (!records_.empty()) {
    const auto& last = records_.back();
    if (r.episode == last.episode && r.step <= last.step)
      throw ConfigError("driving log: steps must increase within an episode");
  }
  records_.push_back(r);
}

std::vector<std::span<const LogRecord>> DrivingLog::episodes() const {
  std::vector<std::span<const LogRecord>> out;
  std::size_t begin = 0;
  for (std::size_t i = 1; i <= records_.size(); ++i) {
    if (i == records_.size() || records_[i].episode != records_[begin].episode) {
      out.emplace_back(records_.data() + begin, i - begin);
      begin = i;
    }
  }
  return out;
}

void write_driving_log(const std::filesystem::path& path, const DrivingLog& log) {
  CsvWriter w(path);
  std::vector<std::string> cols{"episode", "step"};
  for (std::size_t i = 0; i < sim::kAffordanceDim; ++i) cols.push_back("s_" + std::to_string(i));
  cols.push_back("action");
  w.header(cols);
  for (const auto& r : log.records()) {
    w.field(r.episode).field(r.step);
    for (double v : r.state.values) w.field(v);
    w.field(r.action);
    w.end_row();
  }
}

DrivingLog read_driving_log(const std::filesystem::path& path) {
  const CsvTable t = read_csv(path);
  if (t.columns.size() != sim::kAffordanceDim + 3 || t.columns.front() != "episode" ||
      t.columns.back() != "action")
    throw FormatError(path.string() + ": not a driving log");
  DrivingLog log;
  for (std::size_t row = 0; row < t.rows.size(); ++row) {
    LogRecord r;
    r.episode = static_cast<int>(t.number(row, "episode"));
    r.step = static_cast<int>(t.number(row, "step"));
    for (std::size_t i = 0; i < sim::kAffordanceDim; ++i)
      r.state[i] = t.number(row, "s_" + std::to_string(i));
    const double a = t.number(row, "action");
    if (a < 0 || a >= sim::kNumActions || a != std::floor(a))
      throw FormatError(path.string() + ": invalid action id at row " + std::to_string(row + 1));
    r.action = static_cast<int>(a);
    try {
      log.append(r);
    } catch (const ConfigError& e) {
      throw FormatError(path.string() + ": " + e.what());
    }
  }
  return log;
}

}  // namespace highway_rl::mdrnn
