#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <vector>

#include <nlohmann/json.hpp>

#include "highway_rl/numkit/layers.hpp"
#include "highway_rl/sim/action.hpp"
#include "highway_rl/sim/affordance.hpp"

namespace highway_rl::ddqn {

using QValues = std::array<double, sim::kNumActions>;

/// MLP from the 20 normalized affordances to 8 action values, ReLU hidden layers.
class QNetwork {
 public:
  explicit QNetwork(std::vector<std::size_t> hidden = {128, 128});

  void init(std::uint64_t seed);

  numkit::Var forward(numkit::Tape& tape, numkit::Var states);
  numkit::Matrix values(const numkit::Matrix& states) const;
  QValues values(const sim::AffordanceVector& normalized) const;

  const std::vector<std::size_t>& hidden_sizes() const { return hidden_; }
  numkit::ParamSet& params() { return params_; }
  const numkit::ParamSet& params() const { return params_; }

  void save(const std::filesystem::path& path, const nlohmann::ordered_json& extra = {}) const;
  /// Rebuilds the architecture recorded in the file.
  static QNetwork load(const std::filesystem::path& path);

 private:
  std::vector<std::size_t> hidden_;
  numkit::ParamSet params_;
  std::vector<numkit::Dense> layers_;
};

numkit::Matrix states_matrix(const std::vector<sim::AffordanceVector>& states);

}  // namespace highway_rl::ddqn
