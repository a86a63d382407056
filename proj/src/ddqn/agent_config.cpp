#include "highway_rl/ddqn/agent_config.hpp"

#include <algorithm>
#include <cmath>

#include "highway_rl/errors.hpp"
#include "highway_rl/json_fields.hpp"

namespace highway_rl::ddqn {

EpsilonSchedule::EpsilonSchedule(double start, double end, int decay_episodes)
    : start_(start), end_(end), decay_(std::max(decay_episodes, 1)) {}

double EpsilonSchedule::at(int episode) const {
  if (episode >= decay_) return end_;
  const double frac = static_cast<double>(std::max(episode, 0)) / decay_;
  return start_ + (end_ - start_) * frac;
}

void AgentConfig::validate() const {
  if (!(gamma > 0.0 && gamma < 1.0)) throw ConfigError("agent.gamma: must lie in (0, 1)");
  if (!(epsilon_start >= 0.0 && epsilon_start <= 1.0)) throw ConfigError("agent.epsilon_start: must lie in [0, 1]");
  if (!(epsilon_end >= 0.0 && epsilon_end <= 1.0)) throw ConfigError("agent.epsilon_end: must lie in [0, 1]");
  if (epsilon_end > epsilon_start) throw ConfigError("agent.epsilon_end: must not exceed epsilon_start");
  if (!(epsilon_decay_fraction > 0.0 && epsilon_decay_fraction <= 1.0))
    throw ConfigError("agent.epsilon_decay_fraction: must lie in (0, 1]");
  if (batch_size <= 0) throw ConfigError("agent.batch_size: must be positive");
  if (!(learning_rate > 0.0)) throw ConfigError("agent.learning_rate: must be positive");
  if (target_sync_interval <= 0) throw ConfigError("agent.target_sync_interval: must be positive");
  if (hidden.empty()) throw ConfigError("agent.hidden: need at least one hidden layer");
  for (auto h : hidden)
    if (h == 0) throw ConfigError("agent.hidden: sizes must be positive");
  if (safe_capacity <= 0) throw ConfigError("agent.safe_capacity: must be positive");
  if (collision_capacity <= 0) throw ConfigError("agent.collision_capacity: must be positive");
  if (learning_starts < 0) throw ConfigError("agent.learning_starts: must be >= 0");
  if (train_every <= 0) throw ConfigError("agent.train_every: must be positive");
  if (grad_clip < 0.0) throw ConfigError("agent.grad_clip: must be >= 0");
}

EpsilonSchedule AgentConfig::epsilon_schedule(int episodes) const {
  const int decay = static_cast<int>(std::lround(epsilon_decay_fraction * episodes));
  return {epsilon_start, epsilon_end, decay};
}

nlohmann::json to_json(const AgentConfig& c) {
  return {{"gamma", c.gamma},
          {"epsilon_start", c.epsilon_start},
          {"epsilon_end", c.epsilon_end},
          {"epsilon_decay_fraction", c.epsilon_decay_fraction},
          {"batch_size", c.batch_size},
          {"learning_rate", c.learning_rate},
          {"target_sync_interval", c.target_sync_interval},
          {"hidden", c.hidden},
          {"safe_capacity", c.safe_capacity},
          {"collision_capacity", c.collision_capacity},
          {"learning_starts", c.learning_starts},
          {"train_every", c.train_every},
          {"grad_clip", c.grad_clip},
          {"heuristic_penalty", c.heuristic_penalty}};
}

AgentConfig agent_from_json(const nlohmann::json& j, const std::string& path) {
  AgentConfig c;
  FieldReader f(j, path);
  f.read("gamma", c.gamma);
  f.read("epsilon_start", c.epsilon_start);
  f.read("epsilon_end", c.epsilon_end);
  f.read("epsilon_decay_fraction", c.epsilon_decay_fraction);
  f.read("batch_size", c.batch_size);
  f.read("learning_rate", c.learning_rate);
  f.read("target_sync_interval", c.target_sync_interval);
  f.read("hidden", c.hidden);
  f.read("safe_capacity", c.safe_capacity);
  f.read("collision_capacity", c.collision_capacity);
  f.read("learning_starts", c.learning_starts);
  f.read("train_every", c.train_every);
  f.read("grad_clip", c.grad_clip);
  f.read("heuristic_penalty", c.heuristic_penalty);
  f.finish();
  c.validate();
  return c;
}

}  // namespace highway_rl::ddqn
