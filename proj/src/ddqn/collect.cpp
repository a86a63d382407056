#include "highway_rl/ddqn/collect.hpp"

#include <random>

#include "highway_rl/ddqn/learner.hpp"
#include "highway_rl/safety/safety.hpp"
#include "highway_rl/seeding.hpp"

namespace highway_rl::ddqn {

mdrnn::DrivingLog collect_driving_data(const sim::Highway& env, const QNetwork& policy, int episodes,
                                       double epsilon, std::uint64_t seed) {
  const auto& cfg = env.config();
  const auto norm = env.normalizer();
  std::mt19937_64 env_rng(derive_seed(seed, 1));
  std::mt19937_64 agent_rng(derive_seed(seed, 2));
  mdrnn::DrivingLog log;
  for (int e = 0; e < episodes; ++e) {
    std::uniform_int_distribution<int> count(cfg.traffic.vehicles_min, cfg.traffic.vehicles_max);
    const int n = count(env_rng);
    sim::EpisodeState ep = env.reset(n, env_rng());
    for (int step = 0;; ++step) {
      const sim::AffordanceVector raw = env.affordances(ep);
      const sim::AffordanceVector state = norm.normalize(raw);
      std::optional<ActionMask> mask;
      if (cfg.safety.mask_unsafe_actions) mask = safety::safe_action_mask(raw, cfg.actions, cfg.safety);
      const int a = select_action(policy.values(state), epsilon, agent_rng, mask ? &*mask : nullptr);
      log.append({e, step, state, a});
      const auto outcome = env.step(ep, a);
      if (outcome.done) {
        const sim::AffordanceVector last = norm.normalize(env.affordances(ep));
        const int next = greedy_action(policy.values(last));
        log.append({e, step + 1, last, next});
        break;
      }
    }
  }
  return log;
}

}  // namespace highway_rl::ddqn
