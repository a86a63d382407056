#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "highway_rl/harness/experiment.hpp"

namespace highway_rl::harness {

enum ExitCode : int { kExitOk = 0, kExitConfig = 2, kExitArtifact = 3, kExitTraining = 4 };

/// Parsed command line. Unset optionals fall back to the config file, then to defaults.
struct CommandOptions {
  std::optional<std::filesystem::path> config;
  std::vector<std::string> overrides;
  std::optional<std::uint64_t> seed;
  std::vector<std::uint64_t> seeds;
  std::optional<std::filesystem::path> out;
  std::optional<int> episodes;
  std::optional<std::filesystem::path> checkpoint;
  std::optional<std::filesystem::path> predictor;
  std::optional<std::filesystem::path> log;
  std::optional<int> trials;
  std::optional<std::vector<int>> counts;
  std::vector<std::filesystem::path> runs;
};

struct StageContext {
  const ExperimentConfig& cfg;
  std::uint64_t seed;
  std::filesystem::path out;
  std::ostream& log;
};

// Stage bodies. Each writes its artifacts plus a manifest into ctx.out and
// throws on failure; run_command maps the exception to an exit code.

/// DDQN training, with the learned lookahead when `predictor` is set.
void stage_train(const StageContext& ctx, const std::optional<std::filesystem::path>& predictor);
void stage_collect(const StageContext& ctx, const std::filesystem::path& checkpoint, int episodes);
void stage_train_mdrnn(const StageContext& ctx, const std::filesystem::path& log_path);
void stage_evaluate(const StageContext& ctx, const std::filesystem::path& checkpoint, const std::vector<int>& counts,
                    int trials);
void stage_compare(const std::vector<std::filesystem::path>& runs, const std::filesystem::path& out, std::ostream& log);
/// baseline -> collect -> MD-RNN (m = 1 and the configured m) -> safe training
/// -> sweeps for all three agents -> comparison, in subdirectories of ctx.out.
void stage_pipeline(const StageContext& ctx);

/// Maximum concurrent seed runs: HIGHWAY_RL_THREADS if set and positive, else the hardware count.
unsigned fanout_threads();

/// Runs one subcommand; returns the process exit code. `{seed}` in path
/// options expands to the seed of each fanned-out run.
int run_command(const std::string& command, const CommandOptions& opts, std::ostream& out, std::ostream& err);

const std::vector<std::string>& command_names();

}  // namespace highway_rl::harness
