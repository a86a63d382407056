#pragma once

#include <filesystem>
#include <optional>
#include <vector>

#include "highway_rl/csv.hpp"
#include "highway_rl/safety/safety.hpp"
#include "highway_rl/sim/affordance.hpp"

namespace highway_rl::sim {

/// One simulator step as exported to a trace CSV. Affordances are raw units
/// and describe the state after the step.
struct TraceRow {
  int step = 0;
  double ego_x = 0.0;
  double ego_y = 0.0;
  double ego_vx = 0.0;
  int action = 0;
  double reward = 0.0;
  bool collision = false;
  safety::SafetyVerdict verdict;
  AffordanceVector affordances;
};

/// Columns: step,ego_x,ego_y,ego_vx,action,reward,collision,safe,
/// violating_mode,violating_step,aff_0..aff_19 (empty mode/step when safe).
std::vector<std::string> trace_columns();
void write_trace(const std::filesystem::path& path, const std::vector<TraceRow>& rows);

}  // namespace highway_rl::sim
