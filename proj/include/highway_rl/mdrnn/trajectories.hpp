#pragma once

#include <cstddef>
#include <vector>

#include "highway_rl/errors.hpp"
#include "highway_rl/sim/affordance.hpp"

namespace highway_rl::mdrnn {

/// m predicted futures of k raw-unit affordance states each, stored mode-major.
/// at(i, j) is the state j+1 steps after the start under mode i. weight(i) is
/// the mixture weight of mode i at the first step (1 unless set).
class PredictedTrajectories {
 public:
  PredictedTrajectories() = default;
  PredictedTrajectories(std::size_t modes, std::size_t horizon)
      : modes_(modes), horizon_(horizon), states_(modes * horizon), weights_(modes, 1.0) {}

  std::size_t modes() const { return modes_; }
  std::size_t horizon() const { return horizon_; }

  double weight(std::size_t mode) const { return weights_.at(mode); }
  void set_weight(std::size_t mode, double w) { weights_.at(mode) = w; }

  sim::AffordanceVector& at(std::size_t mode, std::size_t step) { return states_.at(index(mode, step)); }
  const sim::AffordanceVector& at(std::size_t mode, std::size_t step) const {
    return states_.at(index(mode, step));
  }

 private:
  std::size_t index(std::size_t mode, std::size_t step) const {
    if (mode >= modes_ || step >= horizon_) throw ContractViolation("trajectory index out of range");
    return mode * horizon_ + step;
  }

  std::size_t modes_ = 0;
  std::size_t horizon_ = 0;
  std::vector<sim::AffordanceVector> states_;
  std::vector<double> weights_;
};

}  // namespace highway_rl::mdrnn
