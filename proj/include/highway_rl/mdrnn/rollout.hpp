#pragma once

#include <functional>

#include "highway_rl/mdrnn/mdrnn.hpp"
#include "highway_rl/mdrnn/trajectories.hpp"

namespace highway_rl::mdrnn {

/// Chooses the action for rollout steps after the first, from a raw-unit predicted state.
using ActionPolicy = std::function<int(const sim::AffordanceVector& raw)>;

/// Mean rollout per mixture component: trajectory i conditions on component i
/// at every step and feeds its mean back as the next input. Actions after the
/// first come from `policy` when given, else the planned action is held.
/// `hidden` is the recurrent state before consuming `start` (zeros if null).
/// Throws ContractViolation if the model is untrained.
PredictedTrajectories predict_trajectories(const MdRnn& model, const sim::AffordanceVector& start_raw,
                                           int planned_action, const numkit::Matrix* hidden = nullptr,
                                           const ActionPolicy* policy = nullptr);

/// Learned lookahead consulted once per training step.
class Lookahead {
 public:
  virtual ~Lookahead() = default;
  /// Called at every episode start.
  virtual void reset() = 0;
  /// Predicted futures of taking `action` in `raw`.
  virtual PredictedTrajectories predict(const sim::AffordanceVector& raw, int action) = 0;
  /// Advances any recurrent context by the executed step.
  virtual void observe(const sim::AffordanceVector& raw, int action) = 0;
};

/// Lookahead backed by a trained MD-RNN; threads the hidden state through the episode.
class MdRnnLookahead : public Lookahead {
 public:
  explicit MdRnnLookahead(const MdRnn& model, ActionPolicy policy = {});

  void reset() override;
  PredictedTrajectories predict(const sim::AffordanceVector& raw, int action) override;
  void observe(const sim::AffordanceVector& raw, int action) override;

 private:
  const MdRnn& model_;
  ActionPolicy policy_;
  numkit::Matrix hidden_;
};

}  // namespace highway_rl::mdrnn
