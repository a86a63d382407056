#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "highway_rl/ddqn/agent_config.hpp"
#include "highway_rl/ddqn/training.hpp"
#include "highway_rl/mdrnn/mdrnn.hpp"
#include "highway_rl/sim/scenario.hpp"

namespace highway_rl::harness {

struct SweepConfig {
  std::vector<int> counts = {6, 12, 18, 24};
  int trials = 300;
  bool operator==(const SweepConfig&) const = default;
};

/// One file drives every stage. Sections: scenario, agent, predictor,
/// protocol, sweep, seeds, output_dir.
struct ExperimentConfig {
  sim::ScenarioConfig scenario;
  ddqn::AgentConfig agent;
  mdrnn::PredictorConfig predictor;
  ddqn::TrainingProtocol protocol;
  SweepConfig sweep;
  std::vector<std::uint64_t> seeds = {0};
  std::string output_dir = "runs";

  void validate() const;
};

nlohmann::json to_json(const ExperimentConfig& c);
/// Strict parse; unknown or mistyped fields raise ConfigError with the dotted path.
ExperimentConfig experiment_from_json(const nlohmann::json& j);

/// Applies "a.b.c=value" to a JSON document. The value is parsed as JSON when
/// possible, otherwise taken as a string. Intermediate objects are created.
void apply_override(nlohmann::json& doc, const std::string& assignment);

/// Reads the file (missing file -> ConfigError), applies overrides in order,
/// then parses.
ExperimentConfig load_experiment(const std::filesystem::path& path, const std::vector<std::string>& overrides = {});
/// Defaults plus overrides, for runs without a config file.
ExperimentConfig default_experiment(const std::vector<std::string>& overrides = {});

}  // namespace highway_rl::harness
