#pragma once

#include <cstdint>
#include <filesystem>

#include <nlohmann/json.hpp>

#include "highway_rl/safety/safety.hpp"
#include "highway_rl/sim/action.hpp"
#include "highway_rl/sim/affordance.hpp"

namespace highway_rl::sim {

inline constexpr int kNumLanes = 3;

struct DynamicsConfig {
  double dt = 0.1;  // s
  double lane_width = 3.5;
  double accel_maintain = 0.0;  // m/s^2
  double accel_accelerate = 2.0;
  double accel_brake = -2.0;
  double accel_hard_brake = -4.0;
  double lane_change_duration = 1.0;  // s
  double v_min = 0.0;                 // m/s
  double v_max = 40.0;
  double vehicle_length = 4.5;  // m
  double vehicle_width = 1.8;

  double acceleration(Longitudinal l) const;
  /// Steps a lane change takes: ceil(lane_change_duration / dt).
  int lane_change_steps() const;
  double lane_center(int lane) const { return (lane + 0.5) * lane_width; }
  double road_width() const { return kNumLanes * lane_width; }
  /// Lane containing lateral position y, clamped to the road.
  int lane_of(double y) const;

  void validate() const;
  bool operator==(const DynamicsConfig&) const = default;
};

struct RewardConfig {
  double v_des = 30.0;     // m/s
  double y_des = 5.25;     // m, center of the middle lane at the default width
  double d_safe = 40.0;    // m
  double r_collision = -10.0;

  void validate() const;
  bool operator==(const RewardConfig&) const = default;
};

struct TrafficConfig {
  double road_length = 500.0;  // ring-road circumference (m)
  double d_sense = 100.0;
  double speed_min = 22.0;  // range for initial and target traffic speeds
  double speed_max = 30.0;
  double lane_change_probability = 0.0;  // per traffic vehicle per step
  int vehicles_min = 6;   // training episodes draw a count uniformly from this range
  int vehicles_max = 24;
  int episode_budget = 200;  // steps

  void validate() const;
  bool operator==(const TrafficConfig&) const = default;
};

struct ScenarioConfig {
  DynamicsConfig dynamics;
  RewardConfig reward;
  TrafficConfig traffic;
  safety::SafetyConfig safety;
  ActionTable actions;

  /// Validates each block plus the cross-field relations (d_min must cover a
  /// vehicle length, the ring must exceed twice the sensing range).
  void validate() const;
  Normalizer normalizer() const;
  bool operator==(const ScenarioConfig&) const = default;
};

// JSON mapping. Unknown keys are rejected with the dotted field path.
nlohmann::json to_json(const ScenarioConfig& cfg);
ScenarioConfig scenario_from_json(const nlohmann::json& j, const std::string& path = "scenario");
ScenarioConfig load_scenario(const std::filesystem::path& file);

}  // namespace highway_rl::sim
