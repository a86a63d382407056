#include "highway_rl/ddqn/training.hpp"

#include <cmath>
#include <limits>

#include "highway_rl/csv.hpp"
#include "highway_rl/errors.hpp"
#include "highway_rl/seeding.hpp"

namespace highway_rl::ddqn {

namespace {

// Sub-seed streams of one run.
enum Stream : std::uint64_t { kInitStream = 1, kAgentStream, kEnvStream, kEvalStream, kReplayStream };

int draw_vehicle_count(const sim::TrafficConfig& t, std::mt19937_64& rng) {
  std::uniform_int_distribution<int> d(t.vehicles_min, t.vehicles_max);
  return d(rng);
}

std::optional<ActionMask> action_mask(const sim::AffordanceVector& raw, const sim::ScenarioConfig& cfg) {
  if (!cfg.safety.mask_unsafe_actions) return std::nullopt;
  return safety::safe_action_mask(raw, cfg.actions, cfg.safety);
}

}  // namespace

EvalSummary evaluate_policy(const sim::Highway& env, const QNetwork& q, int episodes, std::uint64_t seed,
                            std::optional<int> n_vehicles) {
  const auto& cfg = env.config();
  const auto norm = env.normalizer();
  EvalSummary out;
  out.episodes = std::max(episodes, 0);
  double total_return = 0.0;
  long total_steps = 0;
  for (int i = 0; i < episodes; ++i) {
    std::mt19937_64 counts(derive_seed(seed, 0, static_cast<std::uint64_t>(i)));
    const int n = n_vehicles ? *n_vehicles : draw_vehicle_count(cfg.traffic, counts);
    sim::EpisodeState ep = env.reset(n, derive_seed(seed, 1, static_cast<std::uint64_t>(i)));
    sim::AffordanceVector raw = env.affordances(ep);
    for (;;) {
      const auto mask = action_mask(raw, cfg);
      const int a = greedy_action(q.values(norm.normalize(raw)), mask ? &*mask : nullptr);
      const auto outcome = env.step(ep, a);
      total_return += outcome.reward;
      ++total_steps;
      if (outcome.collided) ++out.collisions;
      if (outcome.done) break;
      raw = env.affordances(ep);
    }
  }
  if (episodes > 0) {
    out.mean_return = total_return / episodes;
    out.mean_steps = static_cast<double>(total_steps) / episodes;
  }
  return out;
}

TrainingResult run_training(const sim::Highway& env, const AgentConfig& cfg, const TrainingProtocol& protocol,
                            std::uint64_t seed, const TrainingHooks& hooks) {
  cfg.validate();
  if (protocol.episodes < 0) throw ConfigError("episodes: must be >= 0");
  if (protocol.eval_interval < 0) throw ConfigError("eval_interval: must be >= 0");
  if (protocol.eval_episodes < 0) throw ConfigError("eval_episodes: must be >= 0");

  const auto& scen = env.config();
  const auto norm = env.normalizer();
  const double r_collision = scen.reward.r_collision;

  TrainingResult result{QNetwork(cfg.hidden), {}, {}, 0, 0};
  QNetwork& online = result.q;
  online.init(derive_seed(seed, kInitStream));
  QNetwork target = online;

  std::unique_ptr<mdrnn::Lookahead> owned;
  mdrnn::Lookahead* lookahead = hooks.lookahead;
  if (!lookahead && hooks.make_lookahead) {
    owned = hooks.make_lookahead(online);
    lookahead = owned.get();
  }

  numkit::OptimizerConfig opt_cfg;
  opt_cfg.clip_norm = cfg.grad_clip;
  numkit::Optimizer optimizer(opt_cfg);
  DualReplayBuffer buffer(static_cast<std::size_t>(cfg.safe_capacity), static_cast<std::size_t>(cfg.collision_capacity),
                          r_collision);
  std::mt19937_64 agent_rng(derive_seed(seed, kAgentStream));
  std::mt19937_64 env_rng(derive_seed(seed, kEnvStream));
  std::mt19937_64 replay_rng(derive_seed(seed, kReplayStream));
  const EpsilonSchedule schedule = cfg.epsilon_schedule(protocol.episodes);
  const std::uint64_t eval_seed = derive_seed(seed, kEvalStream);
  const std::size_t starts = static_cast<std::size_t>(cfg.effective_learning_starts());

  for (int episode = 0; episode < protocol.episodes; ++episode) {
    EpisodeMetrics m;
    m.episode = episode;
    m.epsilon = schedule.at(episode);
    const int n = draw_vehicle_count(scen.traffic, env_rng);
    sim::EpisodeState ep = env.reset(n, env_rng());
    if (lookahead) lookahead->reset();
    sim::AffordanceVector raw = env.affordances(ep);
    double loss_sum = 0.0;
    int loss_count = 0;

    for (;;) {
      const sim::AffordanceVector state = norm.normalize(raw);
      const auto mask = action_mask(raw, scen);
      const int action = select_action(online.values(state), m.epsilon, agent_rng, mask ? &*mask : nullptr);
      const sim::StepOutcome outcome = env.step(ep, action);
      const sim::AffordanceVector next_raw = env.affordances(ep);

      const bool heuristic_violation =
          cfg.heuristic_penalty && !outcome.collided && !safety::state_safety(next_raw, scen.safety).safe;
      if (outcome.collided || heuristic_violation) {
        buffer.route({state, action, std::nullopt, r_collision, TransitionSource::Actual});
        if (outcome.collided) ++m.collisions;
        if (heuristic_violation) ++m.heuristic_penalties;
      } else {
        buffer.route({state, action, norm.normalize(next_raw), outcome.reward, TransitionSource::Actual});
      }

      safety::SafetyVerdict predicted;
      if (lookahead) {
        const mdrnn::PredictedTrajectories traj = lookahead->predict(raw, action);
        predicted = safety::predictive_check(traj, scen.safety);
        if (!predicted.safe) {
          const int mode = predicted.violating_mode.value_or(0);
          buffer.route({state, action, norm.normalize(traj.at(mode, 0)), r_collision, TransitionSource::Predicted});
          ++m.predicted_penalties;
        }
        lookahead->observe(raw, action);
      }

      std::vector<Sample> batch;
      std::optional<double> loss;
      const bool update = buffer.safe().size() >= starts && result.total_steps % cfg.train_every == 0;
      if (update) batch = sample_batch(buffer, static_cast<std::size_t>(cfg.batch_size), replay_rng);

      if (update) {
        loss = train_step(batch, online, target, optimizer, cfg.learning_rate, cfg.gamma);
        loss_sum += *loss;
        ++loss_count;
        ++result.updates;
      }
      if (hooks.observer)
        hooks.observer(StepEvent{episode, m.steps, raw, action, outcome, next_raw, heuristic_violation, predicted,
                                 batch, loss, buffer, online, target});

      ++result.total_steps;
      if (result.total_steps % cfg.target_sync_interval == 0) sync_target(online, target);
      m.reward += outcome.reward;
      ++m.steps;
      if (outcome.done) break;
      raw = next_raw;
    }
    m.mean_loss = loss_count > 0 ? loss_sum / loss_count : std::numeric_limits<double>::quiet_NaN();
    result.metrics.push_back(m);

    if (protocol.eval_interval > 0 && (episode + 1) % protocol.eval_interval == 0)
      result.evaluations.push_back({episode + 1, evaluate_policy(env, online, protocol.eval_episodes, eval_seed)});
  }
  return result;
}

void write_metrics_csv(const std::filesystem::path& path, const std::vector<EpisodeMetrics>& rows) {
  CsvWriter w(path);
  w.header({"episode", "reward", "steps", "collisions", "predicted_penalties", "heuristic_penalties", "epsilon",
            "mean_loss"});
  for (const auto& r : rows) {
    w.field(r.episode).field(r.reward).field(r.steps).field(r.collisions).field(r.predicted_penalties);
    w.field(r.heuristic_penalties).field(r.epsilon).field(r.mean_loss);
    w.end_row();
  }
}

void write_eval_csv(const std::filesystem::path& path, const std::vector<EvalPoint>& rows) {
  CsvWriter w(path);
  w.header({"episode", "mean_return", "collisions", "mean_steps", "eval_episodes"});
  for (const auto& r : rows) {
    w.field(r.episode).field(r.summary.mean_return).field(r.summary.collisions).field(r.summary.mean_steps);
    w.field(r.summary.episodes);
    w.end_row();
  }
}

}  // namespace highway_rl::ddqn
