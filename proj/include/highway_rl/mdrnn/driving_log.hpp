#pragma once

#include <filesystem>
#include <span>
#include <vector>

#include "highway_rl/sim/affordance.hpp"

namespace highway_rl::mdrnn {

/// One logged decision: the normalized state seen and the action taken.
struct LogRecord {
  int episode = 0;
  int step = 0;
  sim::AffordanceVector state;
  int action = 0;
  bool operator==(const LogRecord&) const = default;
};

/// Sequence of (state, action) pairs. Records of one episode are contiguous
/// and ordered by step; transitions never cross an episode boundary.
class DrivingLog {
 public:
  void append(LogRecord r);
  const std::vector<LogRecord>& records() const { return records_; }
  std::size_t size() const { return records_.size(); }
  bool empty() const { return records_.empty(); }

  /// Contiguous per-episode views, in log order.
  std::vector<std::span<const LogRecord>> episodes() const;

  bool operator==(const DrivingLog&) const = default;

 private:
  std::vector<LogRecord> records_;
};

/// CSV columns: episode,step,s_0..s_19,action
void write_driving_log(const std::filesystem::path& path, const DrivingLog& log);
DrivingLog read_driving_log(const std::filesystem::path& path);

}  // namespace highway_rl::mdrnn
