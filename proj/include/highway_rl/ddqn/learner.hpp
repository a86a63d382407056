#pragma once

#include <array>
#include <random>
#include <span>
#include <vector>

#include "highway_rl/ddqn/qnetwork.hpp"
#include "highway_rl/ddqn/replay.hpp"
#include "highway_rl/numkit/optimizer.hpp"

namespace highway_rl::ddqn {

using ActionMask = std::array<bool, sim::kNumActions>;

/// epsilon-greedy: one uniform draw decides explore vs exploit; exploring
/// picks uniformly among allowed actions, exploiting takes the allowed argmax
/// with the lowest id on ties. A null mask allows every action.
int select_action(const QValues& q, double epsilon, std::mt19937_64& rng, const ActionMask* mask = nullptr);

/// Lowest-id argmax.
int greedy_action(const QValues& q, const ActionMask* mask = nullptr);

/// r for collision-buffer samples; r + gamma * Q_target(s', argmax_a Q_online(s', a)) otherwise.
double td_target(const Sample& s, const QNetwork& online, const QNetwork& target, double gamma);

/// Batched td_target.
std::vector<double> td_targets(std::span<const Sample> batch, const QNetwork& online, const QNetwork& target,
                               double gamma);

/// mean_b (targets_b - q(b, actions_b))^2 -> 1 x 1.
numkit::Var selected_mse(numkit::Tape& tape, numkit::Var q, std::span<const int> actions,
                         std::span<const double> targets);

/// One optimizer step on the batch; returns the loss before the step. A
/// non-finite loss throws TrainingError with the batch listed.
double train_step(std::span<const Sample> batch, QNetwork& online, const QNetwork& target,
                  numkit::Optimizer& optimizer, double learning_rate, double gamma);

/// Hard copy of online parameters into the target network.
void sync_target(const QNetwork& online, QNetwork& target);

}  // namespace highway_rl::ddqn
