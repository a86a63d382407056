#include "highway_rl/safety/safety.hpp"

#include <algorithm>

#include "highway_rl/errors.hpp"

namespace highway_rl::safety {

using sim::Slot;

void SafetyConfig::validate() const {
  if (!(t_min >= 0.0)) throw ConfigError("safety.t_min: must be >= 0");
  if (!(d_min > 0.0)) throw ConfigError("safety.d_min: must be > 0");
  if (!(min_mode_weight >= 0.0 && min_mode_weight < 1.0))
    throw ConfigError("safety.min_mode_weight: must be in [0, 1)");
}

bool heuristic_check(double d_tv, double v_tv, const SafetyConfig& cfg) {
  return d_tv - cfg.t_min * v_tv > cfg.d_min;
}

namespace {

bool slot_safe(const sim::AffordanceVector& raw, Slot s, const SafetyConfig& cfg) {
  if (!raw.occupied(s)) return true;
  const double d = raw.distance(s);
  const double dv = raw.rel_velocity(s);  // neighbor v_x - ego v_x
  const double gap = sim::is_front(s) ? d : -d;
  const double closing = sim::is_front(s) ? -dv : dv;
  return heuristic_check(gap, std::max(closing, 0.0), cfg);
}

}  // namespace

SafetyVerdict state_safety(const sim::AffordanceVector& raw, const SafetyConfig& cfg) {
  for (std::size_t i = 0; i < sim::kNumSlots; ++i) {
    const auto s = static_cast<Slot>(i);
    if (!slot_safe(raw, s, cfg)) {
      SafetyVerdict v;
      v.safe = false;
      v.violating_slot = s;
      return v;
    }
  }
  return SafetyVerdict::ok();
}

SafetyVerdict predictive_check(const mdrnn::PredictedTrajectories& trajectories,
                               const SafetyConfig& cfg) {
  for (std::size_t step = 0; step < trajectories.horizon(); ++step) {
    for (std::size_t mode = 0; mode < trajectories.modes(); ++mode) {
      if (trajectories.weight(mode) < cfg.min_mode_weight) continue;
      SafetyVerdict v = state_safety(trajectories.at(mode, step), cfg);
      if (!v.safe) {
        v.violating_horizon_step = static_cast<int>(step);
        v.violating_mode = static_cast<int>(mode);
        return v;
      }
    }
  }
  return SafetyVerdict::ok();
}

std::array<bool, sim::kNumActions> safe_action_mask(const sim::AffordanceVector& raw,
                                                    const sim::ActionTable& actions,
                                                    const SafetyConfig& cfg) {
  const bool ahead_clear = slot_safe(raw, Slot::FrontCenter, cfg);
  const bool left_clear = slot_safe(raw, Slot::FrontLeft, cfg) && slot_safe(raw, Slot::RearLeft, cfg);
  const bool right_clear =
      slot_safe(raw, Slot::FrontRight, cfg) && slot_safe(raw, Slot::RearRight, cfg);

  std::array<bool, sim::kNumActions> mask{};
  for (const auto& a : actions.all()) {
    const bool braking = a.longitudinal == sim::Longitudinal::Brake ||
                         a.longitudinal == sim::Longitudinal::HardBrake;
    bool ok = braking || ahead_clear;
    if (a.lateral == sim::Lateral::ChangeLeft) ok = ok && left_clear;
    if (a.lateral == sim::Lateral::ChangeRight) ok = ok && right_clear;
    if (a.longitudinal == sim::Longitudinal::HardBrake && a.lateral == sim::Lateral::Keep) ok = true;
    mask[static_cast<std::size_t>(a.id)] = ok;
  }
  return mask;
}

}  // namespace highway_rl::safety
