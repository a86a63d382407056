#include "highway_rl/sim/highway.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "highway_rl/errors.hpp"

namespace highway_rl::sim {

VehicleState step_dynamics(const VehicleState& v, const DynamicsConfig& cfg) {
  VehicleState out = v;
  out.x = v.x + v.v_x * cfg.dt;
  out.v_x = std::clamp(v.v_x + v.a_x * cfg.dt, cfg.v_min, cfg.v_max);
  out.y = v.y + v.v_y * cfg.dt;
  return out;
}

namespace {

void start_lane_change(Vehicle& v, int target_lane, const DynamicsConfig& cfg) {
  const int lane = cfg.lane_of(v.state.y);
  const double direction = target_lane > lane ? 1.0 : -1.0;
  v.lane_change.target_lane = target_lane;
  v.lane_change.steps_remaining = cfg.lane_change_steps();
  v.state.v_y = direction * cfg.lane_width / cfg.lane_change_duration;
}

void advance(Vehicle& v, const DynamicsConfig& cfg) {
  v.state = step_dynamics(v.state, cfg);
  if (v.lane_change.active() && --v.lane_change.steps_remaining == 0) {
    v.state.y = cfg.lane_center(v.lane_change.target_lane);
    v.state.v_y = 0.0;
  }
}

}  // namespace

EpisodeState apply_action(EpisodeState ep, const ActionSpec& a, const DynamicsConfig& cfg) {
  ep.ego.state.a_x = cfg.acceleration(a.longitudinal);
  if (a.lateral == Lateral::Keep || ep.ego.lane_change.active()) return ep;
  const int lane = cfg.lane_of(ep.ego.state.y);
  const int target = a.lateral == Lateral::ChangeLeft ? lane + 1 : lane - 1;
  if (target < 0 || target >= kNumLanes) return ep;
  start_lane_change(ep.ego, target, cfg);
  return ep;
}

double ring_offset(double from, double to, double road_length) {
  return std::remainder(to - from, road_length);
}

AffordanceVector extract_affordances(const EpisodeState& ep, const ScenarioConfig& cfg) {
  const double d_sense = cfg.traffic.d_sense;
  AffordanceVector aff;
  for (std::size_t s = 0; s < kNumSlots; ++s) {
    const auto slot = static_cast<Slot>(s);
    aff[AffordanceVector::distance_index(slot)] = is_front(slot) ? d_sense : -d_sense;
  }
  const VehicleState& ego = ep.ego.state;
  const int ego_lane = cfg.dynamics.lane_of(ego.y);
  std::array<double, kNumSlots> best;
  best.fill(std::numeric_limits<double>::infinity());

  for (const auto& car : ep.traffic) {
    const int side = cfg.dynamics.lane_of(car.state.y) - ego_lane;  // +1 left, -1 right
    if (side < -1 || side > 1) continue;
    const double dx = ring_offset(ego.x, car.state.x, cfg.traffic.road_length);
    if (std::abs(dx) > d_sense) continue;
    const int column = 1 - side;  // left, center, right
    const auto slot = static_cast<Slot>((dx >= 0.0 ? 0 : 3) + column);
    const auto si = static_cast<std::size_t>(slot);
    if (std::abs(dx) >= best[si]) continue;
    best[si] = std::abs(dx);
    aff[AffordanceVector::distance_index(slot)] = dx;
    aff[AffordanceVector::velocity_index(slot)] = car.state.v_x - ego.v_x;
    aff[AffordanceVector::occupancy_index(slot)] = 1.0;
  }
  aff[AffordanceVector::kEgoSpeed] = ego.v_x;
  aff[AffordanceVector::kEgoLateral] = ego.y;
  return aff;
}

double reward_speed(double v_ex, double v_des) {
  const double e = v_ex - v_des;
  return std::exp(-(e * e) / 10.0) - 1.0;
}

double reward_lane(double d_ey, double y_des) {
  const double e = d_ey - y_des;
  return std::exp(-(e * e) / 10.0) - 1.0;
}

double reward_headway(double d_lead, double d_safe) {
  if (!(d_lead < d_safe)) return 0.0;
  const double e = d_lead - d_safe;
  return std::exp(-(e * e) / (10.0 * d_safe)) - 1.0;
}

double total_reward(const EpisodeState& ep, bool collided, const ScenarioConfig& cfg) {
  if (collided) return cfg.reward.r_collision;
  const AffordanceVector aff = extract_affordances(ep, cfg);
  return reward_speed(aff.ego_speed(), cfg.reward.v_des) +
         reward_lane(aff.ego_lateral(), cfg.reward.y_des) +
         reward_headway(aff.distance(Slot::FrontCenter), cfg.reward.d_safe);
}

bool detect_collision(const EpisodeState& ep, double road_length) {
  const VehicleState& e = ep.ego.state;
  for (const auto& car : ep.traffic) {
    const VehicleState& o = car.state;
    const double dx = std::abs(ring_offset(e.x, o.x, road_length));
    const double dy = std::abs(o.y - e.y);
    if (dx < 0.5 * (e.length + o.length) && dy < 0.5 * (e.width + o.width)) return true;
  }
  return false;
}

namespace {

struct Leader {
  double gap = std::numeric_limits<double>::infinity();
  double speed = 0.0;
  bool found = false;
};

Leader find_leader(const EpisodeState& ep, std::size_t self, const ScenarioConfig& cfg) {
  const VehicleState& me = ep.traffic[self].state;
  const int lane = cfg.dynamics.lane_of(me.y);
  Leader best;
  auto consider = [&](const VehicleState& other) {
    if (cfg.dynamics.lane_of(other.y) != lane) return;
    const double dx = ring_offset(me.x, other.x, cfg.traffic.road_length);
    if (dx > 0.0 && dx < best.gap) best = Leader{dx, other.v_x, true};
  };
  consider(ep.ego.state);
  for (std::size_t j = 0; j < ep.traffic.size(); ++j)
    if (j != self) consider(ep.traffic[j].state);
  return best;
}

bool target_lane_clear(const EpisodeState& ep, std::size_t self, int lane, const ScenarioConfig& cfg) {
  const VehicleState& me = ep.traffic[self].state;
  auto clear = [&](const VehicleState& other) {
    if (cfg.dynamics.lane_of(other.y) != lane) return true;
    return std::abs(ring_offset(me.x, other.x, cfg.traffic.road_length)) >= cfg.reward.d_safe;
  };
  if (!clear(ep.ego.state)) return false;
  for (std::size_t j = 0; j < ep.traffic.size(); ++j)
    if (j != self && !clear(ep.traffic[j].state)) return false;
  return true;
}

}  // namespace

EpisodeState traffic_policy_step(EpisodeState ep, const ScenarioConfig& cfg) {
  const auto& dyn = cfg.dynamics;
  for (std::size_t i = 0; i < ep.traffic.size(); ++i) {
    Vehicle& car = ep.traffic[i];
    const Leader leader = find_leader(ep, i, cfg);
    if (leader.found && !safety::heuristic_check(leader.gap, car.state.v_x - leader.speed, cfg.safety)) {
      car.state.a_x = leader.gap < cfg.safety.d_min ? dyn.accel_hard_brake : dyn.accel_brake;
    } else {
      car.state.a_x = std::clamp(car.target_speed - car.state.v_x, dyn.accel_brake, dyn.accel_accelerate);
    }

    if (cfg.traffic.lane_change_probability > 0.0 && !car.lane_change.active()) {
      std::uniform_real_distribution<double> u(0.0, 1.0);
      if (u(ep.rng) < cfg.traffic.lane_change_probability) {
        const int lane = dyn.lane_of(car.state.y);
        const int target = lane + (u(ep.rng) < 0.5 ? -1 : 1);
        if (target >= 0 && target < kNumLanes && target_lane_clear(ep, i, target, cfg))
          start_lane_change(car, target, dyn);
      }
    }
  }
  return ep;
}

EpisodeState reset_episode(int n_vehicles, std::uint64_t seed, const ScenarioConfig& cfg) {
  if (n_vehicles < 0) throw ConfigError("reset_episode: vehicle count must be >= 0");
  const auto& dyn = cfg.dynamics;
  const double length = cfg.traffic.road_length;
  const double gap = std::max(cfg.reward.d_safe, dyn.vehicle_length);

  // Lane 1 holds ego at x = 0, so its cars need clearance on both sides of ego.
  std::array<int, kNumLanes> capacity{};
  for (int lane = 0; lane < kNumLanes; ++lane) {
    capacity[lane] = lane == 1 ? (length >= 2.0 * gap ? static_cast<int>(std::floor((length - 2.0 * gap) / gap)) + 1 : 0)
                               : static_cast<int>(std::floor(length / gap));
  }
  const int total_capacity = capacity[0] + capacity[1] + capacity[2];
  if (n_vehicles > total_capacity)
    throw ConfigError("reset_episode: " + std::to_string(n_vehicles) + " vehicles do not fit on a " +
                      std::to_string(length) + " m road with gaps >= " + std::to_string(gap) +
                      " m (capacity " + std::to_string(total_capacity) + ")");

  EpisodeState ep;
  ep.seed = seed;
  ep.rng.seed(seed);
  ep.ego.state = VehicleState{0.0, dyn.lane_center(1), cfg.reward.v_des, 0.0, 0.0, dyn.vehicle_length,
                              dyn.vehicle_width};
  ep.ego.state.v_x = std::clamp(ep.ego.state.v_x, dyn.v_min, dyn.v_max);
  ep.ego.target_speed = ep.ego.state.v_x;

  std::array<int, kNumLanes> count{};
  for (int i = 0; i < n_vehicles; ++i) {
    std::vector<int> open;
    for (int lane = 0; lane < kNumLanes; ++lane)
      if (count[lane] < capacity[lane]) open.push_back(lane);
    std::uniform_int_distribution<std::size_t> pick(0, open.size() - 1);
    ++count[open[pick(ep.rng)]];
  }

  std::uniform_real_distribution<double> speed(cfg.traffic.speed_min, cfg.traffic.speed_max);
  for (int lane = 0; lane < kNumLanes; ++lane) {
    const int c = count[lane];
    if (c == 0) continue;
    // Uniform configuration with minimum spacing: sorted uniforms on the
    // slack length, then shifted by i * gap.
    const double slack = lane == 1 ? length - 2.0 * gap - (c - 1) * gap : length - c * gap;
    std::uniform_real_distribution<double> u(0.0, slack);
    std::vector<double> offsets(static_cast<std::size_t>(c));
    for (double& o : offsets) o = u(ep.rng);
    std::sort(offsets.begin(), offsets.end());
    const double origin = lane == 1 ? gap : std::uniform_real_distribution<double>(0.0, length)(ep.rng);
    for (int k = 0; k < c; ++k) {
      Vehicle car;
      const double x = origin + offsets[static_cast<std::size_t>(k)] + k * gap;
      car.state = VehicleState{std::remainder(x, length), dyn.lane_center(lane), 0.0, 0.0, 0.0,
                               dyn.vehicle_length, dyn.vehicle_width};
      car.state.v_x = speed(ep.rng);
      car.target_speed = speed(ep.rng);
      ep.traffic.push_back(car);
    }
  }
  return ep;
}

Highway::Highway(ScenarioConfig cfg) : cfg_(std::move(cfg)) { cfg_.validate(); }

EpisodeState Highway::reset(int n_vehicles, std::uint64_t seed) const {
  return reset_episode(n_vehicles, seed, cfg_);
}

StepOutcome Highway::step(EpisodeState& ep, int action_id) const {
  if (ep.step >= cfg_.traffic.episode_budget)
    throw ContractViolation("step called on an episode that exhausted its budget");
  ep = apply_action(std::move(ep), cfg_.actions[action_id], cfg_.dynamics);
  ep = traffic_policy_step(std::move(ep), cfg_);
  advance(ep.ego, cfg_.dynamics);
  for (auto& car : ep.traffic) advance(car, cfg_.dynamics);
  ++ep.step;

  StepOutcome out;
  out.collided = detect_collision(ep, cfg_.traffic.road_length);
  out.reward = total_reward(ep, out.collided, cfg_);
  out.done = out.collided || ep.step >= cfg_.traffic.episode_budget;
  return out;
}

}  // namespace highway_rl::sim
