#include "highway_rl/ddqn/replay.hpp"

namespace highway_rl::ddqn {

DualReplayBuffer::DualReplayBuffer(std::size_t safe_capacity, std::size_t collision_capacity, double r_collision)
    : safe_(safe_capacity), collision_(collision_capacity), r_collision_(r_collision) {}

void DualReplayBuffer::route(Transition t) {
  if (!t.next_state && t.reward != r_collision_)
    throw ContractViolation("terminal transition must carry R_collision");
  if (t.reward == r_collision_) {
    collision_.push(std::move(t));
  } else {
    safe_.push(std::move(t));
  }
}

std::vector<Sample> sample_batch(const DualReplayBuffer& buffer, std::size_t batch, std::mt19937_64& rng) {
  if (buffer.safe().empty()) throw ContractViolation("sample_batch: safe buffer is empty");
  const std::size_t from_collision = buffer.collision().empty() ? 0 : batch / 2;
  const std::size_t from_safe = batch - from_collision;
  std::vector<Sample> out;
  out.reserve(batch);
  std::uniform_int_distribution<std::size_t> pick_safe(0, buffer.safe().size() - 1);
  for (std::size_t i = 0; i < from_safe; ++i) out.push_back({buffer.safe()[pick_safe(rng)], false});
  if (from_collision > 0) {
    std::uniform_int_distribution<std::size_t> pick_coll(0, buffer.collision().size() - 1);
    for (std::size_t i = 0; i < from_collision; ++i) out.push_back({buffer.collision()[pick_coll(rng)], true});
  }
  return out;
}

}  // namespace highway_rl::ddqn
