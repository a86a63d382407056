#pragma once

#include <cstdint>
#include <filesystem>
#include <utility>

#include <nlohmann/json.hpp>

#include "highway_rl/mdrnn/gmm.hpp"
#include "highway_rl/numkit/layers.hpp"
#include "highway_rl/sim/action.hpp"
#include "highway_rl/sim/affordance.hpp"

namespace highway_rl::mdrnn {

inline constexpr std::size_t kStateDim = sim::kAffordanceDim;
inline constexpr std::size_t kInputDim = sim::kAffordanceDim + sim::kNumActions;

enum class RolloutActions { RepeatPlanned, GreedyPolicy };

struct PredictorConfig {
  int m = 3;              // mixture components = predicted trajectories
  int k = 5;              // prediction horizon (steps)
  int hidden = 64;
  double learning_rate = 3e-3;
  int epochs = 20;
  double sigma_floor = 1e-3;  // normalized units
  int tbptt_length = 20;
  int batch_streams = 16;     // episodes trained side by side
  double holdout_fraction = 0.1;
  double grad_clip = 10.0;
  RolloutActions rollout_actions = RolloutActions::RepeatPlanned;
  int collect_episodes = 100;
  double collect_epsilon = 0.1;

  void validate() const;
  bool operator==(const PredictorConfig&) const = default;
};

nlohmann::json to_json(const PredictorConfig& c);
PredictorConfig predictor_from_json(const nlohmann::json& j, const std::string& path = "predictor");

/// Mixture-density recurrent network: a tanh recurrent cell over
/// [normalized state, one-hot action] followed by three heads producing the
/// mixture logits, means and log-std offsets of the next normalized state.
class MdRnn {
 public:
  struct Taped {
    numkit::Var hidden, logits, means, raw_std;
  };
  struct Heads {
    numkit::Matrix logits, means, raw_std;
  };

  MdRnn(std::size_t m, std::size_t hidden, std::size_t horizon, double sigma_floor, sim::Normalizer normalizer);

  void init(std::uint64_t seed);

  static numkit::Matrix encode(const sim::AffordanceVector& normalized, int action);
  numkit::Matrix zero_hidden(std::size_t rows = 1) const;

  Taped step(numkit::Tape& tape, numkit::Var input, numkit::Var hidden);
  numkit::Matrix advance(const numkit::Matrix& inputs, const numkit::Matrix& hidden) const;
  Heads heads(const numkit::Matrix& hidden) const;

  /// One recurrent step for a single sample: returns the next-state mixture and the new hidden row.
  std::pair<GmmParams, numkit::Matrix> forward(const sim::AffordanceVector& normalized, int action,
                                               const numkit::Matrix& hidden) const;

  std::size_t components() const { return m_; }
  std::size_t hidden_size() const { return hidden_; }
  std::size_t horizon() const { return horizon_; }
  double sigma_floor() const { return sigma_floor_; }
  const sim::Normalizer& normalizer() const { return normalizer_; }

  bool trained() const { return trained_; }
  void set_trained(bool t) { trained_ = t; }

  numkit::ParamSet& params() { return params_; }
  const numkit::ParamSet& params() const { return params_; }

  nlohmann::ordered_json metadata() const;
  void save(const std::filesystem::path& path) const;
  /// Rebuilds the architecture from the file's metadata block.
  static MdRnn load(const std::filesystem::path& path);

 private:
  std::size_t m_;
  std::size_t hidden_;
  std::size_t horizon_;
  double sigma_floor_;
  sim::Normalizer normalizer_;
  bool trained_ = false;

  numkit::ParamSet params_;
  numkit::RecurrentCell cell_;
  numkit::Dense logits_head_;
  numkit::Dense means_head_;
  numkit::Dense std_head_;
};

}  // namespace highway_rl::mdrnn
