#include <cmath>
#include <map>
#include <random>

#include <gtest/gtest.h>

#include "highway_rl/ddqn/agent_config.hpp"
#include "highway_rl/ddqn/collect.hpp"
#include "highway_rl/ddqn/learner.hpp"
#include "highway_rl/ddqn/qnetwork.hpp"
#include "highway_rl/ddqn/replay.hpp"
#include "highway_rl/ddqn/training.hpp"
#include "highway_rl/errors.hpp"
#include "support/gradcheck.hpp"
#include "support/tempdir.hpp"

namespace dq = highway_rl::ddqn;
namespace nk = highway_rl::numkit;
namespace sim = highway_rl::sim;
using highway_rl::ConfigError;
using highway_rl::ContractViolation;

namespace {

/// Linear net whose outputs ignore the input: Q(s, a) = bias[a].
dq::QNetwork constant_q(const dq::QValues& q) {
  dq::QNetwork net(std::vector<std::size_t>{});
  auto& ps = net.params();
  ps[ps.find("q.out.weight")].value.setZero();
  auto& b = ps[ps.find("q.out.bias")].value;
  for (int a = 0; a < sim::kNumActions; ++a) b(0, a) = q[static_cast<std::size_t>(a)];
  return net;
}

dq::Transition safe_transition(double reward, int action = 0) {
  dq::Transition t;
  t.action = action;
  t.next_state = sim::AffordanceVector{};
  t.reward = reward;
  return t;
}

dq::Transition collision_transition() {
  dq::Transition t;
  t.reward = -10.0;
  return t;
}

sim::ScenarioConfig short_scenario() {
  sim::ScenarioConfig cfg;
  cfg.traffic.episode_budget = 25;
  return cfg;
}

dq::AgentConfig small_agent() {
  dq::AgentConfig cfg;
  cfg.hidden = {16};
  cfg.batch_size = 8;
  cfg.target_sync_interval = 20;
  return cfg;
}

/// Always predicts a car one meter ahead.
class AlarmLookahead : public highway_rl::mdrnn::Lookahead {
 public:
  void reset() override { ++resets; }
  highway_rl::mdrnn::PredictedTrajectories predict(const sim::AffordanceVector& raw, int) override {
    highway_rl::mdrnn::PredictedTrajectories t(2, 3);
    for (std::size_t m = 0; m < 2; ++m)
      for (std::size_t j = 0; j < 3; ++j) t.at(m, j) = raw;
    auto& s = t.at(1, 0);
    s[sim::AffordanceVector::distance_index(sim::Slot::FrontCenter)] = 1.0;
    s[sim::AffordanceVector::occupancy_index(sim::Slot::FrontCenter)] = 1.0;
    return t;
  }
  void observe(const sim::AffordanceVector&, int) override { ++observed; }
  int resets = 0;
  int observed = 0;
};

}  // namespace

TEST(RingBuffer, FifoOverwritesOldest) {
  dq::RingBuffer<int> rb(3);
  for (int i = 0; i < 5; ++i) rb.push(i);
  ASSERT_EQ(rb.size(), 3u);
  EXPECT_EQ(rb[0], 2);
  EXPECT_EQ(rb[1], 3);
  EXPECT_EQ(rb[2], 4);
  EXPECT_THROW(dq::RingBuffer<int>(0), ConfigError);
}

TEST(DualReplay, RoutesByCollisionReward) {
  dq::DualReplayBuffer buf(10, 10, -10.0);
  buf.route(safe_transition(-0.3));
  buf.route(safe_transition(-9.999));
  buf.route(collision_transition());
  auto predicted = safe_transition(-10.0);
  predicted.source = dq::TransitionSource::Predicted;
  buf.route(predicted);
  EXPECT_EQ(buf.safe().size(), 2u);
  EXPECT_EQ(buf.collision().size(), 2u);
  for (std::size_t i = 0; i < buf.collision().size(); ++i) EXPECT_EQ(buf.collision()[i].reward, -10.0);
  for (std::size_t i = 0; i < buf.safe().size(); ++i) EXPECT_NE(buf.safe()[i].reward, -10.0);
}

TEST(DualReplay, MissingSuccessorRequiresCollisionReward) {
  dq::DualReplayBuffer buf(10, 10, -10.0);
  dq::Transition t;
  t.reward = 1.0;
  EXPECT_THROW(buf.route(t), ContractViolation);
}

TEST(SampleBatch, HalfFromEachBuffer) {
  dq::DualReplayBuffer buf(100, 100, -10.0);
  for (int i = 0; i < 50; ++i) buf.route(safe_transition(0.1 * i));
  for (int i = 0; i < 3; ++i) buf.route(collision_transition());
  std::mt19937_64 rng(0);
  for (std::size_t batch : {32u, 33u, 1u}) {
    const auto s = dq::sample_batch(buf, batch, rng);
    ASSERT_EQ(s.size(), batch);
    std::size_t coll = 0;
    for (const auto& x : s) {
      coll += x.from_collision;
      EXPECT_EQ(x.from_collision, x.transition.reward == -10.0);
    }
    EXPECT_EQ(coll, batch / 2);
  }
}

TEST(SampleBatch, AllSafeWhileCollisionBufferEmpty) {
  dq::DualReplayBuffer buf(100, 100, -10.0);
  buf.route(safe_transition(1.0));
  std::mt19937_64 rng(0);
  const auto s = dq::sample_batch(buf, 32, rng);
  ASSERT_EQ(s.size(), 32u);
  for (const auto& x : s) EXPECT_FALSE(x.from_collision);
}

TEST(SampleBatch, EmptySafeBufferIsContractViolation) {
  dq::DualReplayBuffer buf(10, 10, -10.0);
  buf.route(collision_transition());
  std::mt19937_64 rng(0);
  EXPECT_THROW(dq::sample_batch(buf, 4, rng), ContractViolation);
}

TEST(SampleBatch, DrawsUniformlyWithReplacement) {
  dq::DualReplayBuffer buf(10, 10, -10.0);
  for (int i = 0; i < 4; ++i) buf.route(safe_transition(i));
  std::mt19937_64 rng(1);
  std::map<double, int> counts;
  for (int i = 0; i < 2000; ++i)
    for (const auto& x : dq::sample_batch(buf, 8, rng)) ++counts[x.transition.reward];
  for (const auto& [r, c] : counts) EXPECT_NEAR(c / 16000.0, 0.25, 0.02) << r;
}

TEST(TdTarget, CollisionSampleIsItsReward) {
  const auto q = constant_q({5, 5, 5, 5, 5, 5, 5, 5});
  dq::Sample s{collision_transition(), true};
  EXPECT_EQ(dq::td_target(s, q, q, 0.95), -10.0);
}

TEST(TdTarget, HandEvaluatedDoubleQ) {
  const auto online = constant_q({0, 0, 3, 0, 0, 0, 0, 0});
  const auto target = constant_q({0, 0, 1.0, 0, 0, 0, 0, 0});
  EXPECT_NEAR(dq::td_target({safe_transition(0.5), false}, online, target, 0.9), 1.4, 1e-15);
  EXPECT_EQ(dq::td_target({safe_transition(0.5), false}, online, target, 0.0), 0.5);
}

TEST(TdTarget, SelectionUsesOnlineEvaluationUsesTarget) {
  const auto online = constant_q({0, 9, 0, 0, 0, 0, 0, 0});
  const auto target = constant_q({0, 2, 0, 0, 0, 7, 0, 0});
  EXPECT_NEAR(dq::td_target({safe_transition(1.0), false}, online, target, 0.5), 1.0 + 0.5 * 2.0, 1e-15);
  EXPECT_NEAR(dq::td_target({safe_transition(1.0), false}, target, target, 0.5), 1.0 + 0.5 * 7.0, 1e-15);
}

TEST(TdTarget, BatchedMatchesSingle) {
  dq::QNetwork a({8}), b({8});
  a.init(1);
  b.init(2);
  std::mt19937_64 rng(3);
  std::normal_distribution<double> n;
  std::vector<dq::Sample> batch;
  for (int i = 0; i < 10; ++i) {
    auto t = i % 3 == 0 ? collision_transition() : safe_transition(n(rng));
    if (t.next_state)
      for (double& v : t.next_state->values) v = n(rng);
    batch.push_back({t, i % 3 == 0});
  }
  const auto y = dq::td_targets(batch, a, b, 0.95);
  for (std::size_t i = 0; i < batch.size(); ++i) EXPECT_NEAR(y[i], dq::td_target(batch[i], a, b, 0.95), 1e-12);
}

TEST(SelectAction, GreedyWithLowestIdTies) {
  std::mt19937_64 rng(0);
  EXPECT_EQ(dq::select_action({0, 1, 5, 5, 2, 0, 0, 0}, 0.0, rng), 2);
  EXPECT_EQ(dq::greedy_action({1, 1, 1, 1, 1, 1, 1, 1}), 0);
}

TEST(SelectAction, FullExplorationIsUniform) {
  std::mt19937_64 rng(4);
  std::array<int, 8> counts{};
  const int n = 80000;
  for (int i = 0; i < n; ++i) ++counts[static_cast<std::size_t>(dq::select_action({9, 0, 0, 0, 0, 0, 0, 0}, 1.0, rng))];
  for (int c : counts) EXPECT_NEAR(c / double(n), 0.125, 0.006);
}

TEST(SelectAction, EpsilonFractionExplores) {
  std::mt19937_64 rng(5);
  int non_greedy = 0;
  const int n = 40000;
  for (int i = 0; i < n; ++i) non_greedy += dq::select_action({9, 0, 0, 0, 0, 0, 0, 0}, 0.4, rng) != 0;
  EXPECT_NEAR(non_greedy / double(n), 0.4 * 7.0 / 8.0, 0.01);
}

TEST(SelectAction, MaskRestrictsBothBranches) {
  std::mt19937_64 rng(6);
  const dq::ActionMask mask = {false, false, true, true, false, false, false, false};
  for (int i = 0; i < 1000; ++i) {
    const int a = dq::select_action({9, 8, 1, 2, 0, 0, 0, 0}, 0.5, rng, &mask);
    EXPECT_TRUE(a == 2 || a == 3);
  }
  EXPECT_EQ(dq::greedy_action({9, 8, 1, 2, 0, 0, 0, 0}, &mask), 3);
  const dq::ActionMask none{};
  EXPECT_THROW(dq::greedy_action({}, &none), ContractViolation);
  EXPECT_THROW(dq::select_action({}, 1.5, rng), ContractViolation);
}

TEST(SelectedMse, OnlyTakenActionContributes) {
  nk::Tape t;
  nk::Matrix q(2, 8);
  q.setConstant(100.0);
  q(0, 3) = 1.0;
  q(1, 6) = -2.0;
  const auto qv = t.constant(q);
  const int actions[] = {3, 6};
  const double targets[] = {2.0, 0.0};
  EXPECT_DOUBLE_EQ(t.value(dq::selected_mse(t, qv, actions, targets))(0, 0), (1.0 + 4.0) / 2.0);
  const int bad[] = {3, 8};
  EXPECT_THROW(dq::selected_mse(t, qv, bad, targets), ConfigError);
}

TEST(TrainStep, SingleSampleLossAndGradient) {
  dq::QNetwork online({6, 5}), target({6, 5});
  online.init(10);
  target.init(11);
  auto tr = safe_transition(0.7, 4);
  for (std::size_t i = 0; i < 20; ++i) {
    tr.state[i] = 0.05 * static_cast<double>(i) - 0.4;
    (*tr.next_state)[i] = 0.3 - 0.02 * static_cast<double>(i);
  }
  const std::vector<dq::Sample> batch = {{tr, false}};
  const double y = dq::td_target(batch[0], online, target, 0.95);
  const double q = online.values(tr.state)[4];

  auto loss = [&](nk::Tape& tape) {
    const auto out = online.forward(tape, tape.constant(dq::states_matrix({tr.state})));
    const int a[] = {4};
    const double yy[] = {y};
    return dq::selected_mse(tape, out, a, yy);
  };
  const auto check = highway_rl::testing::grad_check(online.params(), loss);
  EXPECT_LT(check.max_rel_error, 1e-4) << check.worst;

  nk::Optimizer opt(nk::OptimizerConfig{nk::OptimizerKind::Sgd});
  const double pre = dq::train_step(batch, online, target, opt, 1e-2, 0.95);
  EXPECT_NEAR(pre, (y - q) * (y - q), 1e-12);
  EXPECT_LT(std::abs(online.values(tr.state)[4] - y), std::abs(q - y));
}

TEST(TrainStep, FixedPointLeavesParametersUnchanged) {
  const auto target = constant_q({0, 0, 0, 0, 0, 0, 0, 0});
  auto online = constant_q({0, 0.5, 0, 0, 0, 0, 0, 0});
  const std::vector<dq::Sample> batch = {{safe_transition(0.5, 1), false}};
  const auto before = online.params()[1].value;
  nk::Optimizer opt(nk::OptimizerConfig{nk::OptimizerKind::Sgd});
  EXPECT_EQ(dq::train_step(batch, online, target, opt, 0.1, 0.95), 0.0);
  EXPECT_EQ(online.params()[1].value, before);
}

TEST(TrainStep, NonFiniteLossIsTrainingError) {
  auto online = constant_q({0, 0, 0, 0, 0, 0, 0, 0});
  const auto target = online;
  const std::vector<dq::Sample> batch = {{safe_transition(std::nan(""), 2), false}};
  nk::Optimizer opt;
  EXPECT_THROW(dq::train_step(batch, online, target, opt, 0.1, 0.95), highway_rl::TrainingError);
}

TEST(SyncTarget, CopiesOnlineExactly) {
  dq::QNetwork online({4}), target({4});
  online.init(1);
  target.init(2);
  sim::AffordanceVector s;
  s.values.fill(0.3);
  EXPECT_NE(online.values(s), target.values(s));
  dq::sync_target(online, target);
  EXPECT_EQ(online.values(s), target.values(s));
  dq::QNetwork other({5});
  EXPECT_THROW(dq::sync_target(online, other), ConfigError);
}

TEST(QNetwork, SaveLoadRoundTrip) {
  highway_rl::testing::TempDir dir;
  dq::QNetwork q({7, 3});
  q.init(8);
  q.save(dir.path() / "q.json");
  const auto back = dq::QNetwork::load(dir.path() / "q.json");
  EXPECT_EQ(back.hidden_sizes(), q.hidden_sizes());
  sim::AffordanceVector s;
  s.values.fill(-0.2);
  EXPECT_EQ(back.values(s), q.values(s));
  EXPECT_THROW(dq::QNetwork::load(dir.path() / "nope.json"), highway_rl::FormatError);
  EXPECT_THROW(dq::QNetwork({0}), ConfigError);
}

TEST(Epsilon, LinearDecayThenConstant) {
  const dq::EpsilonSchedule e(1.0, 0.05, 10);
  EXPECT_EQ(e.at(0), 1.0);
  EXPECT_NEAR(e.at(5), 0.525, 1e-12);
  EXPECT_EQ(e.at(10), 0.05);
  EXPECT_EQ(e.at(1000), 0.05);
  double prev = 2.0;
  for (int i = 0; i < 30; ++i) {
    const double v = e.at(i);
    EXPECT_LE(v, prev);
    EXPECT_GE(v, 0.05);
    EXPECT_LE(v, 1.0);
    prev = v;
  }
}

TEST(AgentConfig, JsonRoundTripAndValidation) {
  dq::AgentConfig c;
  c.gamma = 0.9;
  c.hidden = {32, 16};
  c.heuristic_penalty = true;
  EXPECT_EQ(dq::agent_from_json(dq::to_json(c)), c);
  EXPECT_THROW(dq::agent_from_json(nlohmann::json{{"gamma", 1.5}}), ConfigError);
  EXPECT_THROW(dq::agent_from_json(nlohmann::json{{"batch_size", 0}}), ConfigError);
  EXPECT_THROW(dq::agent_from_json(nlohmann::json{{"gama", 0.9}}), ConfigError);
}

TEST(RunTraining, DeterministicPerSeed) {
  const sim::Highway env(short_scenario());
  const dq::TrainingProtocol proto{6, 3, 2};
  const auto a = dq::run_training(env, small_agent(), proto, 42);
  const auto b = dq::run_training(env, small_agent(), proto, 42);
  ASSERT_EQ(a.metrics.size(), 6u);
  ASSERT_EQ(a.evaluations.size(), 2u);
  EXPECT_EQ(a.evaluations[1].episode, 6);
  EXPECT_EQ(a.total_steps, b.total_steps);
  for (std::size_t i = 0; i < a.metrics.size(); ++i) {
    EXPECT_EQ(a.metrics[i].reward, b.metrics[i].reward);
    EXPECT_TRUE(a.metrics[i].mean_loss == b.metrics[i].mean_loss ||
                (std::isnan(a.metrics[i].mean_loss) && std::isnan(b.metrics[i].mean_loss)));
  }
  EXPECT_EQ(a.evaluations[0].summary.mean_return, b.evaluations[0].summary.mean_return);
  const auto c = dq::run_training(env, small_agent(), proto, 43);
  EXPECT_NE(a.metrics[0].reward, c.metrics[0].reward);
}

TEST(RunTraining, StepInvariantsHoldOnEveryBatch) {
  const sim::Highway env(short_scenario());
  auto cfg = small_agent();
  long steps = 0, sync_checks = 0;
  dq::TrainingHooks hooks;
  hooks.observer = [&](const dq::StepEvent& e) {
    ++steps;
    const auto& coll = e.buffer.collision();
    for (std::size_t i = 0; i < coll.size(); ++i) ASSERT_EQ(coll[i].reward, -10.0);
    if (!e.batch.empty()) {
      ASSERT_EQ(e.batch.size(), 8u);
      std::size_t from_coll = 0;
      for (const auto& s : e.batch) from_coll += s.from_collision;
      ASSERT_EQ(from_coll, coll.empty() ? 0u : 4u);
      const auto y = dq::td_targets(e.batch, e.online, e.target, cfg.gamma);
      for (std::size_t i = 0; i < e.batch.size(); ++i)
        if (e.batch[i].from_collision) {
          ASSERT_EQ(y[i], e.batch[i].transition.reward);
        }
    }
    if (steps % cfg.target_sync_interval == 0) ++sync_checks;
  };
  const auto r = dq::run_training(env, cfg, {8, 0, 0}, 3, hooks);
  EXPECT_EQ(steps, r.total_steps);
  EXPECT_GT(sync_checks, 0);
  EXPECT_GT(r.updates, 0);
}

TEST(RunTraining, TargetSyncsExactlyOnInterval) {
  const sim::Highway env(short_scenario());
  auto cfg = small_agent();
  cfg.target_sync_interval = 7;
  sim::AffordanceVector probe;
  probe.values.fill(0.1);
  long steps = 0;
  dq::QValues last_target{};
  bool first = true;
  int changes = 0, bad = 0;
  dq::TrainingHooks hooks;
  hooks.observer = [&](const dq::StepEvent& e) {
    const auto t = e.target.values(probe);
    if (!first && t != last_target) {
      ++changes;
      if (steps % 7 != 0) ++bad;
    }
    first = false;
    last_target = t;
    ++steps;
  };
  dq::run_training(env, cfg, {4, 0, 0}, 5, hooks);
  EXPECT_GT(changes, 0);
  EXPECT_EQ(bad, 0);
}

TEST(RunTraining, PredictedPenaltiesDoNotEndEpisodes) {
  auto scen = short_scenario();
  scen.traffic.vehicles_min = 0;
  scen.traffic.vehicles_max = 0;
  const sim::Highway env(scen);
  AlarmLookahead look;
  dq::TrainingHooks hooks;
  hooks.lookahead = &look;
  int predicted_in_buffer = 0;
  hooks.observer = [&](const dq::StepEvent& e) {
    EXPECT_FALSE(e.predicted.safe);
    EXPECT_EQ(e.predicted.violating_mode, 1);
    EXPECT_EQ(e.predicted.violating_horizon_step, 0);
    if (!e.buffer.collision().empty() && e.buffer.collision()[e.buffer.collision().size() - 1].source ==
                                             dq::TransitionSource::Predicted)
      ++predicted_in_buffer;
  };
  const auto r = dq::run_training(env, small_agent(), {3, 0, 0}, 1, hooks);
  for (const auto& m : r.metrics) {
    EXPECT_EQ(m.collisions, 0);
    EXPECT_EQ(m.steps, 25);
    EXPECT_EQ(m.predicted_penalties, 25);
  }
  EXPECT_EQ(look.resets, 3);
  EXPECT_EQ(look.observed, 75);
  EXPECT_EQ(predicted_in_buffer, 75);
}

TEST(RunTraining, HeuristicPenaltyIsOptIn) {
  auto scen = short_scenario();
  scen.traffic.vehicles_min = 20;
  scen.traffic.vehicles_max = 20;
  const sim::Highway env(scen);
  auto cfg = small_agent();
  int off = 0, on = 0;
  for (const auto& m : dq::run_training(env, cfg, {6, 0, 0}, 4).metrics) off += m.heuristic_penalties;
  cfg.heuristic_penalty = true;
  for (const auto& m : dq::run_training(env, cfg, {6, 0, 0}, 4).metrics) on += m.heuristic_penalties;
  EXPECT_EQ(off, 0);
  EXPECT_GT(on, 0);
}

TEST(RunTraining, WithoutLookaheadNothingIsPredicted) {
  const sim::Highway env(short_scenario());
  const auto r = dq::run_training(env, small_agent(), {3, 0, 0}, 2);
  for (const auto& m : r.metrics) EXPECT_EQ(m.predicted_penalties, 0);
  EXPECT_TRUE(r.evaluations.empty());
}

TEST(Evaluate, SameScenariosRegardlessOfPolicy) {
  const sim::Highway env(short_scenario());
  const auto q = constant_q({0, 0, 0, 0, 0, 0, 0, 0});
  const auto a = dq::evaluate_policy(env, q, 5, 9, 0);
  EXPECT_EQ(a.collisions, 0);
  EXPECT_EQ(a.mean_steps, 25.0);
  EXPECT_NEAR(a.mean_return, 0.0, 1e-12);
  const auto b = dq::evaluate_policy(env, q, 5, 9);
  EXPECT_EQ(b.mean_return, dq::evaluate_policy(env, q, 5, 9).mean_return);
}

TEST(Collect, LogsTerminalStateAndIsDeterministic) {
  const sim::Highway env(short_scenario());
  dq::QNetwork q({8});
  q.init(0);
  const auto log = dq::collect_driving_data(env, q, 4, 0.1, 3);
  const auto eps = log.episodes();
  ASSERT_EQ(eps.size(), 4u);
  for (const auto& e : eps) {
    EXPECT_GE(e.size(), 2u);
    EXPECT_LE(e.size(), 26u);
    EXPECT_EQ(e.front().step, 0);
    EXPECT_EQ(e.back().step, static_cast<int>(e.size()) - 1);
  }
  EXPECT_EQ(log, dq::collect_driving_data(env, q, 4, 0.1, 3));
  EXPECT_TRUE(dq::collect_driving_data(env, q, 0, 0.1, 3).empty());
}
