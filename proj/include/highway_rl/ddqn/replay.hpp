#pragma once

#include <cstddef>
#include <optional>
#include <random>
#include <vector>

#include "highway_rl/errors.hpp"
#include "highway_rl/sim/affordance.hpp"

namespace highway_rl::ddqn {

enum class TransitionSource { Actual, Predicted };

/// (s, a, s', r) with normalized states. An absent next state marks an actual
/// terminal collision; predicted-collision records keep the predicted s'.
struct Transition {
  sim::AffordanceVector state;
  int action = 0;
  std::optional<sim::AffordanceVector> next_state;
  double reward = 0.0;
  TransitionSource source = TransitionSource::Actual;
  bool operator==(const Transition&) const = default;
};

/// Fixed-capacity FIFO; index 0 is the oldest element.
template <class T>
class RingBuffer {
 public:
  explicit RingBuffer(std::size_t capacity) : capacity_(capacity) {
    if (capacity == 0) throw ConfigError("replay capacity must be > 0");
    data_.reserve(std::min<std::size_t>(capacity, 4096));
  }

  void push(T item) {
    if (data_.size() < capacity_) {
      data_.push_back(std::move(item));
    } else {
      data_[head_] = std::move(item);
      head_ = (head_ + 1) % capacity_;
    }
  }

  const T& operator[](std::size_t i) const { return data_[(head_ + i) % data_.size()]; }
  std::size_t size() const { return data_.size(); }
  std::size_t capacity() const { return capacity_; }
  bool empty() const { return data_.empty(); }

 private:
  std::size_t capacity_;
  std::size_t head_ = 0;
  std::vector<T> data_;
};

/// Safe and collision stores. Routing is by reward: exactly R_collision goes
/// to the collision buffer, anything else to the safe buffer.
class DualReplayBuffer {
 public:
  DualReplayBuffer(std::size_t safe_capacity, std::size_t collision_capacity, double r_collision);

  void route(Transition t);

  const RingBuffer<Transition>& safe() const { return safe_; }
  const RingBuffer<Transition>& collision() const { return collision_; }
  double r_collision() const { return r_collision_; }

 private:
  RingBuffer<Transition> safe_;
  RingBuffer<Transition> collision_;
  double r_collision_;
};

struct Sample {
  Transition transition;
  bool from_collision = false;
};

/// ceil(batch/2) uniform draws with replacement from the safe buffer and
/// floor(batch/2) from the collision buffer; all from safe while the
/// collision buffer is empty. Throws ContractViolation if the safe buffer is empty.
std::vector<Sample> sample_batch(const DualReplayBuffer& buffer, std::size_t batch, std::mt19937_64& rng);

}  // namespace highway_rl::ddqn
