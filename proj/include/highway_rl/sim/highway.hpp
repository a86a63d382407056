#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "highway_rl/sim/scenario.hpp"

namespace highway_rl::sim {

struct VehicleState {
  double x = 0.0;    // longitudinal position (m)
  double y = 0.0;    // lateral position (m)
  double v_x = 0.0;  // m/s
  double v_y = 0.0;
  double a_x = 0.0;  // commanded longitudinal acceleration (m/s^2)
  double length = 4.5;
  double width = 1.8;
  bool operator==(const VehicleState&) const = default;
};

struct LaneChange {
  int steps_remaining = 0;
  int target_lane = 0;
  bool active() const { return steps_remaining > 0; }
  bool operator==(const LaneChange&) const = default;
};

struct Vehicle {
  VehicleState state;
  double target_speed = 0.0;
  LaneChange lane_change;
  bool operator==(const Vehicle&) const = default;
};

/// Complete simulator state. A value: copying it forks the episode, including
/// the random stream that drives traffic.
struct EpisodeState {
  Vehicle ego;
  std::vector<Vehicle> traffic;
  int step = 0;
  std::uint64_t seed = 0;
  std::mt19937_64 rng;
  bool operator==(const EpisodeState&) const = default;
};

/// Explicit Euler point-mass update; position advances with the pre-update velocity.
VehicleState step_dynamics(const VehicleState& v, const DynamicsConfig& cfg);

/// Sets the ego command. Lateral requests are ignored mid-change and at the
/// road edge.
EpisodeState apply_action(EpisodeState ep, const ActionSpec& a, const DynamicsConfig& cfg);

/// Signed shortest longitudinal offset from `from` to `to` on the ring.
double ring_offset(double from, double to, double road_length);

AffordanceVector extract_affordances(const EpisodeState& ep, const ScenarioConfig& cfg);

double reward_speed(double v_ex, double v_des);
double reward_lane(double d_ey, double y_des);
double reward_headway(double d_lead, double d_safe);

/// R_collision if collided, else the sum of the three shaped terms.
double total_reward(const EpisodeState& ep, bool collided, const ScenarioConfig& cfg);

/// Axis-aligned rectangle overlap between ego and any traffic vehicle.
bool detect_collision(const EpisodeState& ep, double road_length);

/// Sets every traffic vehicle's command: brake when its own gap rule against
/// the vehicle ahead fails, otherwise track its target speed.
EpisodeState traffic_policy_step(EpisodeState ep, const ScenarioConfig& cfg);

/// Ego in the middle lane at v_des; traffic in random lanes with same-lane
/// gaps >= d_safe. Throws ConfigError when the cars cannot fit.
EpisodeState reset_episode(int n_vehicles, std::uint64_t seed, const ScenarioConfig& cfg);

struct StepOutcome {
  bool collided = false;
  bool done = false;
  double reward = 0.0;
};

/// Episode stepping for one scenario: ego command, traffic command, dynamics
/// for every vehicle, lane-change completion, then collision and reward.
class Highway {
 public:
  explicit Highway(ScenarioConfig cfg);

  EpisodeState reset(int n_vehicles, std::uint64_t seed) const;
  StepOutcome step(EpisodeState& ep, int action_id) const;
  AffordanceVector affordances(const EpisodeState& ep) const { return extract_affordances(ep, cfg_); }

  const ScenarioConfig& config() const { return cfg_; }
  Normalizer normalizer() const { return cfg_.normalizer(); }

 private:
  ScenarioConfig cfg_;
};

}  // namespace highway_rl::sim
