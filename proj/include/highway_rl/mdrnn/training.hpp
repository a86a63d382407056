#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "highway_rl/mdrnn/driving_log.hpp"
#include "highway_rl/mdrnn/mdrnn.hpp"

namespace highway_rl::mdrnn {

struct EpochReport {
  int epoch = 0;  // 0 = before any update
  double train_nll = 0.0;
  double heldout_nll = 0.0;  // NaN when the log has a single episode
};

struct TrainReport {
  std::vector<EpochReport> epochs;
  std::size_t train_pairs = 0;
  std::size_t heldout_pairs = 0;
  std::size_t train_episodes = 0;
  std::size_t heldout_episodes = 0;
};

/// Mean one-step NLL of next-state targets over the given episodes, with the
/// hidden state threaded from zero at each episode start.
double evaluate_nll(const MdRnn& model, std::span<const std::span<const LogRecord>> episodes,
                    std::size_t streams = 16);

/// Fits the model by truncated backpropagation through time on a by-episode
/// train split, reporting train and held-out NLL before training and after
/// every epoch. Throws ConfigError for an empty log. Marks the model trained.
TrainReport train_offline(MdRnn& model, const DrivingLog& log, const PredictorConfig& cfg,
                          std::uint64_t seed);

}  // namespace highway_rl::mdrnn
