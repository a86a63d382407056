#pragma once

#include <array>
#include <optional>

#include "highway_rl/mdrnn/trajectories.hpp"
#include "highway_rl/sim/action.hpp"
#include "highway_rl/sim/affordance.hpp"

namespace highway_rl::safety {

struct SafetyConfig {
  double t_min = 2.0;   // minimum time to collision (s)
  double d_min = 10.0;  // minimum gap (m)
  /// Restrict action selection to commands that pass the gap rule now.
  bool mask_unsafe_actions = false;
  /// Predicted modes whose first-step mixture weight is below this are not
  /// checked. 0 checks every mode.
  double min_mode_weight = 0.0;

  void validate() const;
  bool operator==(const SafetyConfig&) const = default;
};

struct SafetyVerdict {
  bool safe = true;
  std::optional<sim::Slot> violating_slot;
  std::optional<int> violating_horizon_step;  // 0-based, 0 = first predicted state
  std::optional<int> violating_mode;          // 0-based mixture component

  static SafetyVerdict ok() { return {}; }
};

/// Minimum-gap rule: d_tv - t_min * v_tv > d_min (strict). `v_tv` is the
/// signed closing speed, positive when the gap shrinks.
bool heuristic_check(double d_tv, double v_tv, const SafetyConfig& cfg);

/// Applies the gap rule to every occupied slot of a raw-unit state. Front
/// slots close when ego is faster, rear slots when the neighbor is faster;
/// an opening gap counts as zero closing speed.
SafetyVerdict state_safety(const sim::AffordanceVector& raw, const SafetyConfig& cfg);

/// Unsafe iff any predicted state of any mode (with weight >= min_mode_weight)
/// fails state_safety. Reports the earliest violating step, lowest mode index on ties.
SafetyVerdict predictive_check(const mdrnn::PredictedTrajectories& trajectories,
                               const SafetyConfig& cfg);

/// Which actions pass the gap rule in the current state: lane changes need
/// both target-lane slots clear, non-braking commands need the lane ahead
/// clear. Hard brake + keep is always allowed.
std::array<bool, sim::kNumActions> safe_action_mask(const sim::AffordanceVector& raw,
                                                    const sim::ActionTable& actions,
                                                    const SafetyConfig& cfg);

}  // namespace highway_rl::safety
