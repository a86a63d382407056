#include "highway_rl/sim/trace.hpp"

namespace highway_rl::sim {

std::vector<std::string> trace_columns() {
  std::vector<std::string> cols{"step",      "ego_x", "ego_y", "ego_vx",         "action",
                                "reward",    "collision", "safe", "violating_mode", "violating_step"};
  for (std::size_t i = 0; i < kAffordanceDim; ++i) cols.push_back("aff_" + std::to_string(i));
  return cols;
}

void write_trace(const std::filesystem::path& path, const std::vector<TraceRow>& rows) {
  CsvWriter w(path);
  w.header(trace_columns());
  for (const auto& r : rows) {
    w.field(r.step).field(r.ego_x).field(r.ego_y).field(r.ego_vx).field(r.action).field(r.reward);
    w.field(r.collision).field(r.verdict.safe);
    if (r.verdict.violating_mode) w.field(*r.verdict.violating_mode); else w.empty_field();
    if (r.verdict.violating_horizon_step) w.field(*r.verdict.violating_horizon_step); else w.empty_field();
    for (double v : r.affordances.values) w.field(v);
    w.end_row();
  }
}

}  // namespace highway_rl::sim
