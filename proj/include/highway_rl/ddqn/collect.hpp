#pragma once

#include <cstdint>

#include "highway_rl/ddqn/qnetwork.hpp"
#include "highway_rl/mdrnn/driving_log.hpp"
#include "highway_rl/sim/highway.hpp"

namespace highway_rl::ddqn {

/// Drives `episodes` episodes with the epsilon-greedy baseline policy and logs
/// every visited state with the action chosen there. The terminal state is
/// logged too (its action is the one the policy would take next), so an
/// episode of T steps contributes T + 1 records and T transitions.
mdrnn::DrivingLog collect_driving_data(const sim::Highway& env, const QNetwork& policy, int episodes,
                                       double epsilon, std::uint64_t seed);

}  // namespace highway_rl::ddqn
