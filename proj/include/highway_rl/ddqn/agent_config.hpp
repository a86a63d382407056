#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace highway_rl::ddqn {

/// Linear decay from `start` to `end` over the first `decay_episodes`
/// episodes, then constant.
class EpsilonSchedule {
 public:
  EpsilonSchedule(double start, double end, int decay_episodes);
  double at(int episode) const;

 private:
  double start_;
  double end_;
  int decay_;
};

struct AgentConfig {
  double gamma = 0.95;
  double epsilon_start = 1.0;
  double epsilon_end = 0.05;
  double epsilon_decay_fraction = 0.6;  // of the training episodes
  int batch_size = 32;
  double learning_rate = 1e-3;
  int target_sync_interval = 500;  // environment steps
  std::vector<std::size_t> hidden = {128, 128};
  int safe_capacity = 50000;
  int collision_capacity = 50000;
  int learning_starts = 0;  // safe-buffer size before updates begin; 0 means batch_size
  int train_every = 1;      // environment steps per gradient update
  double grad_clip = 10.0;  // global norm, 0 disables
  /// Also penalize and store as terminal any step whose successor fails the
  /// gap rule. Off by default: only actual collisions end in R_collision.
  bool heuristic_penalty = false;

  void validate() const;
  EpsilonSchedule epsilon_schedule(int episodes) const;
  int effective_learning_starts() const { return learning_starts > 0 ? learning_starts : batch_size; }
  bool operator==(const AgentConfig&) const = default;
};

nlohmann::json to_json(const AgentConfig& c);
AgentConfig agent_from_json(const nlohmann::json& j, const std::string& path = "agent");

}  // namespace highway_rl::ddqn
