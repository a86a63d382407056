#include "highway_rl/sim/scenario.hpp"

#include <cmath>
#include <fstream>

#include "highway_rl/errors.hpp"
#include "highway_rl/json_fields.hpp"

namespace highway_rl::sim {

double DynamicsConfig::acceleration(Longitudinal l) const {
  switch (l) {
    case Longitudinal::Maintain: return accel_maintain;
    case Longitudinal::Accelerate: return accel_accelerate;
    case Longitudinal::Brake: return accel_brake;
    case Longitudinal::HardBrake: return accel_hard_brake;
  }
  return 0.0;
}

int DynamicsConfig::lane_change_steps() const {
  // The epsilon absorbs representation error in ratios such as 1.0 / 0.1.
  return std::max(1, static_cast<int>(std::ceil(lane_change_duration / dt - 1e-9)));
}

int DynamicsConfig::lane_of(double y) const {
  const int lane = static_cast<int>(std::floor(y / lane_width));
  return std::clamp(lane, 0, kNumLanes - 1);
}

void DynamicsConfig::validate() const {
  if (!(dt > 0.0)) throw ConfigError("scenario.dynamics.dt: must be > 0");
  if (!(lane_width > 0.0)) throw ConfigError("scenario.dynamics.lane_width: must be > 0");
  if (!(accel_brake < 0.0)) throw ConfigError("scenario.dynamics.accel_brake: must be < 0");
  if (!(accel_hard_brake < accel_brake))
    throw ConfigError("scenario.dynamics.accel_hard_brake: must be stronger than accel_brake");
  if (!(accel_accelerate > 0.0)) throw ConfigError("scenario.dynamics.accel_accelerate: must be > 0");
  if (!(lane_change_duration > 0.0))
    throw ConfigError("scenario.dynamics.lane_change_duration: must be > 0");
  if (!(v_min >= 0.0)) throw ConfigError("scenario.dynamics.v_min: must be >= 0");
  if (!(v_max > v_min)) throw ConfigError("scenario.dynamics.v_max: must exceed v_min");
  if (!(vehicle_length > 0.0)) throw ConfigError("scenario.dynamics.vehicle_length: must be > 0");
  if (!(vehicle_width > 0.0 && vehicle_width < lane_width))
    throw ConfigError("scenario.dynamics.vehicle_width: must be in (0, lane_width)");
}

void RewardConfig::validate() const {
  if (!(d_safe > 0.0)) throw ConfigError("scenario.reward.d_safe: must be > 0");
  if (!(r_collision < -3.0)) throw ConfigError("scenario.reward.r_collision: must be < -3");
  if (!std::isfinite(v_des) || !std::isfinite(y_des))
    throw ConfigError("scenario.reward: v_des and y_des must be finite");
}

void TrafficConfig::validate() const {
  if (!(road_length > 0.0)) throw ConfigError("scenario.traffic.road_length: must be > 0");
  if (!(d_sense > 0.0)) throw ConfigError("scenario.traffic.d_sense: must be > 0");
  if (!(speed_min >= 0.0 && speed_max >= speed_min))
    throw ConfigError("scenario.traffic.speed_min/speed_max: need 0 <= speed_min <= speed_max");
  if (!(lane_change_probability >= 0.0 && lane_change_probability <= 1.0))
    throw ConfigError("scenario.traffic.lane_change_probability: must be in [0, 1]");
  if (vehicles_min < 0 || vehicles_max < vehicles_min)
    throw ConfigError("scenario.traffic.vehicles_min/vehicles_max: need 0 <= min <= max");
  if (episode_budget < 1) throw ConfigError("scenario.traffic.episode_budget: must be >= 1");
}

void ScenarioConfig::validate() const {
  dynamics.validate();
  reward.validate();
  traffic.validate();
  safety.validate();
  if (safety.d_min < dynamics.vehicle_length)
    throw ConfigError("scenario.safety.d_min: must be >= scenario.dynamics.vehicle_length");
  if (!(traffic.road_length > 2.0 * traffic.d_sense))
    throw ConfigError("scenario.traffic.road_length: must exceed twice d_sense");
  if (traffic.speed_max > dynamics.v_max || traffic.speed_min < dynamics.v_min)
    throw ConfigError("scenario.traffic.speed_min/speed_max: must lie within dynamics [v_min, v_max]");
}

Normalizer ScenarioConfig::normalizer() const {
  return Normalizer{traffic.d_sense, dynamics.v_max, dynamics.road_width()};
}

nlohmann::json to_json(const ScenarioConfig& c) {
  nlohmann::json j;
  const auto& d = c.dynamics;
  j["dynamics"] = {{"dt", d.dt},
                   {"lane_width", d.lane_width},
                   {"accel_maintain", d.accel_maintain},
                   {"accel_accelerate", d.accel_accelerate},
                   {"accel_brake", d.accel_brake},
                   {"accel_hard_brake", d.accel_hard_brake},
                   {"lane_change_duration", d.lane_change_duration},
                   {"v_min", d.v_min},
                   {"v_max", d.v_max},
                   {"vehicle_length", d.vehicle_length},
                   {"vehicle_width", d.vehicle_width}};
  const auto& r = c.reward;
  j["reward"] = {{"v_des", r.v_des}, {"y_des", r.y_des}, {"d_safe", r.d_safe}, {"r_collision", r.r_collision}};
  const auto& t = c.traffic;
  j["traffic"] = {{"road_length", t.road_length},
                  {"d_sense", t.d_sense},
                  {"speed_min", t.speed_min},
                  {"speed_max", t.speed_max},
                  {"lane_change_probability", t.lane_change_probability},
                  {"vehicles_min", t.vehicles_min},
                  {"vehicles_max", t.vehicles_max},
                  {"episode_budget", t.episode_budget}};
  j["safety"] = {{"t_min", c.safety.t_min},
                 {"d_min", c.safety.d_min},
                 {"mask_unsafe_actions", c.safety.mask_unsafe_actions},
                 {"min_mode_weight", c.safety.min_mode_weight}};
  nlohmann::json actions = nlohmann::json::array();
  for (const auto& a : c.actions.all())
    actions.push_back({std::string(to_string(a.longitudinal)), std::string(to_string(a.lateral))});
  j["actions"] = actions;
  return j;
}

ScenarioConfig scenario_from_json(const nlohmann::json& j, const std::string& path) {
  ScenarioConfig c;
  FieldReader root(j, path);
  {
    FieldReader f(root.child("dynamics"), path + ".dynamics");
    auto& d = c.dynamics;
    f.read("dt", d.dt);
    f.read("lane_width", d.lane_width);
    f.read("accel_maintain", d.accel_maintain);
    f.read("accel_accelerate", d.accel_accelerate);
    f.read("accel_brake", d.accel_brake);
    f.read("accel_hard_brake", d.accel_hard_brake);
    f.read("lane_change_duration", d.lane_change_duration);
    f.read("v_min", d.v_min);
    f.read("v_max", d.v_max);
    f.read("vehicle_length", d.vehicle_length);
    f.read("vehicle_width", d.vehicle_width);
    f.finish();
  }
  {
    FieldReader f(root.child("reward"), path + ".reward");
    auto& r = c.reward;
    f.read("v_des", r.v_des);
    if (!f.has("y_des")) r.y_des = c.dynamics.lane_center(1);
    f.read("y_des", r.y_des);
    f.read("d_safe", r.d_safe);
    f.read("r_collision", r.r_collision);
    f.finish();
  }
  {
    FieldReader f(root.child("traffic"), path + ".traffic");
    auto& t = c.traffic;
    f.read("road_length", t.road_length);
    f.read("d_sense", t.d_sense);
    f.read("speed_min", t.speed_min);
    f.read("speed_max", t.speed_max);
    f.read("lane_change_probability", t.lane_change_probability);
    f.read("vehicles_min", t.vehicles_min);
    f.read("vehicles_max", t.vehicles_max);
    f.read("episode_budget", t.episode_budget);
    f.finish();
  }
  {
    FieldReader f(root.child("safety"), path + ".safety");
    f.read("t_min", c.safety.t_min);
    f.read("d_min", c.safety.d_min);
    f.read("mask_unsafe_actions", c.safety.mask_unsafe_actions);
    f.read("min_mode_weight", c.safety.min_mode_weight);
    f.finish();
  }
  if (root.has("actions")) {
    const auto& arr = root.child("actions");
    if (!arr.is_array() || arr.size() != kNumActions)
      throw ConfigError(path + ".actions: expected 8 [longitudinal, lateral] pairs");
    std::array<ActionSpec, kNumActions> specs;
    for (std::size_t i = 0; i < kNumActions; ++i) {
      const auto& p = arr[i];
      if (!p.is_array() || p.size() != 2 || !p[0].is_string() || !p[1].is_string())
        throw ConfigError(path + ".actions[" + std::to_string(i) + "]: expected [string, string]");
      specs[i] = ActionSpec{static_cast<int>(i), longitudinal_from_string(p[0].get<std::string>()),
                            lateral_from_string(p[1].get<std::string>())};
    }
    c.actions = ActionTable(specs);
  }
  root.finish();
  c.validate();
  return c;
}

ScenarioConfig load_scenario(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw ConfigError("cannot open scenario file " + file.string());
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("scenario file " + file.string() + ": " + e.what());
  }
  return scenario_from_json(j.contains("scenario") ? j["scenario"] : j);
}

}  // namespace highway_rl::sim
