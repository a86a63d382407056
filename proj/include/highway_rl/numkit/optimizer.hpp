#pragma once

#include <vector>

#include "highway_rl/numkit/param.hpp"

namespace highway_rl::numkit {

enum class OptimizerKind { Adam, Sgd };

struct OptimizerConfig {
  OptimizerKind kind = OptimizerKind::Adam;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  /// Global L2 gradient-norm clip; 0 disables.
  double clip_norm = 0.0;
};

/// First-order update rule. Holds per-tensor moment estimates, so one
/// instance belongs to exactly one ParamSet layout.
class Optimizer {
 public:
  explicit Optimizer(OptimizerConfig cfg = {}) : cfg_(cfg) {}

  /// Applies one update from the accumulated gradients, then zeroes them.
  /// Throws TrainingError (leaving values untouched) if any gradient is non-finite.
  void step(ParamSet& params, double lr);

  long steps_taken() const { return t_; }
  const OptimizerConfig& config() const { return cfg_; }

 private:
  OptimizerConfig cfg_;
  std::vector<Matrix> m_;
  std::vector<Matrix> v_;
  long t_ = 0;
};

}  // namespace highway_rl::numkit
