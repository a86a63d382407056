#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "highway_rl/ddqn/agent_config.hpp"
#include "highway_rl/ddqn/learner.hpp"
#include "highway_rl/mdrnn/rollout.hpp"
#include "highway_rl/safety/safety.hpp"
#include "highway_rl/sim/highway.hpp"

namespace highway_rl::ddqn {

struct TrainingProtocol {
  int episodes = 600;
  int eval_interval = 50;  // 0 disables periodic evaluation
  int eval_episodes = 20;
};

struct EpisodeMetrics {
  int episode = 0;
  double reward = 0.0;  // cumulative shaped reward
  int steps = 0;
  int collisions = 0;
  int predicted_penalties = 0;
  int heuristic_penalties = 0;
  double epsilon = 0.0;
  double mean_loss = 0.0;  // NaN when no update ran this episode
};

struct EvalSummary {
  int episodes = 0;
  int collisions = 0;
  double mean_return = 0.0;
  double mean_steps = 0.0;
};

struct EvalPoint {
  int episode = 0;  // training episodes completed
  EvalSummary summary;
};

/// Everything that happened in one training step, for tests and traces.
struct StepEvent {
  int episode = 0;
  int step = 0;  // 0-based within the episode
  const sim::AffordanceVector& state_raw;
  int action = 0;
  sim::StepOutcome outcome;
  const sim::AffordanceVector& next_raw;
  bool heuristic_violation = false;
  safety::SafetyVerdict predicted;  // always safe without a lookahead
  std::span<const Sample> batch;    // empty when no update ran
  std::optional<double> loss;
  const DualReplayBuffer& buffer;
  const QNetwork& online;  // after this step's update
  const QNetwork& target;
};

using StepObserver = std::function<void(const StepEvent&)>;
using LookaheadFactory = std::function<std::unique_ptr<mdrnn::Lookahead>(const QNetwork& online)>;

struct TrainingHooks {
  /// Borrowed lookahead; takes precedence over `make_lookahead`.
  mdrnn::Lookahead* lookahead = nullptr;
  /// Builds a lookahead that may consult the live online network.
  LookaheadFactory make_lookahead;
  StepObserver observer;
};

struct TrainingResult {
  QNetwork q;
  std::vector<EpisodeMetrics> metrics;
  std::vector<EvalPoint> evaluations;
  long total_steps = 0;
  long updates = 0;
};

/// Greedy episodes with vehicle counts drawn from the scenario range unless
/// `n_vehicles` is set. Episode i uses the same scenario for a given seed
/// regardless of the policy.
EvalSummary evaluate_policy(const sim::Highway& env, const QNetwork& q, int episodes, std::uint64_t seed,
                            std::optional<int> n_vehicles = std::nullopt);

/// Double DQN with dual buffers and optional learned lookahead penalties.
TrainingResult run_training(const sim::Highway& env, const AgentConfig& cfg, const TrainingProtocol& protocol,
                            std::uint64_t seed, const TrainingHooks& hooks = {});

/// Columns: episode,reward,steps,collisions,predicted_penalties,heuristic_penalties,epsilon,mean_loss
void write_metrics_csv(const std::filesystem::path& path, const std::vector<EpisodeMetrics>& rows);
/// Columns: episode,mean_return,collisions,mean_steps,eval_episodes
void write_eval_csv(const std::filesystem::path& path, const std::vector<EvalPoint>& rows);

}  // namespace highway_rl::ddqn
