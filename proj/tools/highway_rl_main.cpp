#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "highway_rl/harness/commands.hpp"

namespace hh = highway_rl::harness;

int main(int argc, char** argv) {
  CLI::App app{"Safe reinforcement learning for highway driving with an MD-RNN lookahead"};
  app.require_subcommand(1);

  struct Raw {
    std::string config, out, checkpoint, predictor, log;
    std::vector<std::string> overrides;
    std::vector<std::uint64_t> seeds;
    std::vector<int> counts;
    std::uint64_t seed = 0;
    int episodes = 0;
    int trials = 0;
    std::vector<std::string> runs;
  } raw;

  struct Sub {
    CLI::App* app;
    CLI::Option* seed = nullptr;
    CLI::Option* episodes = nullptr;
    CLI::Option* trials = nullptr;
    CLI::Option* counts = nullptr;
  };
  std::vector<Sub> subs;

  const std::vector<std::pair<std::string, std::string>> descriptions = {
      {"train-baseline", "Train DDQN without the learned predictor"},
      {"collect", "Log (state, action) episodes from a baseline checkpoint"},
      {"train-mdrnn", "Fit the MD-RNN predictor to a driving log"},
      {"train-safe", "Train DDQN with the MD-RNN lookahead"},
      {"evaluate", "Greedy collision sweep over vehicle counts"},
      {"compare", "Align learning curves and sweeps of several runs"},
      {"pipeline", "Run every stage end to end"}};

  for (const auto& [name, help] : descriptions) {
    Sub s{app.add_subcommand(name, help)};
    auto* a = s.app;
    a->add_option("--config", raw.config, "Experiment JSON file")->check(CLI::ExistingFile);
    a->add_option("--override", raw.overrides, "Dotted key=value applied over the config file")->take_all();
    a->add_option("--out", raw.out, "Output directory");
    if (name != "compare") {
      s.seed = a->add_option("--seed", raw.seed, "Run seed");
      a->add_option("--seeds", raw.seeds, "Several seeds, one output subdirectory each")->delimiter(',');
    }
    if (name == "train-baseline" || name == "train-safe" || name == "collect" || name == "pipeline")
      s.episodes = a->add_option("--episodes", raw.episodes, "Training (or collection) episodes");
    if (name == "collect" || name == "evaluate")
      a->add_option("--checkpoint", raw.checkpoint, "Q-network checkpoint (q.json)");
    if (name == "train-safe") a->add_option("--predictor", raw.predictor, "MD-RNN checkpoint (mdrnn.json)");
    if (name == "train-mdrnn") a->add_option("--log", raw.log, "Driving log CSV");
    if (name == "evaluate" || name == "pipeline") {
      s.trials = a->add_option("--trials", raw.trials, "Greedy episodes per vehicle count");
      s.counts = a->add_option("--counts", raw.counts, "Vehicle counts, comma separated")->delimiter(',');
    }
    if (name == "compare") a->add_option("runs", raw.runs, "Run directories holding eval.csv")->required();
    subs.push_back(s);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : hh::kExitConfig;
  }

  for (const auto& s : subs) {
    if (!s.app->parsed()) continue;
    hh::CommandOptions o;
    if (!raw.config.empty()) o.config = raw.config;
    o.overrides = raw.overrides;
    if (s.seed && s.seed->count()) o.seed = raw.seed;
    o.seeds = raw.seeds;
    if (!raw.out.empty()) o.out = raw.out;
    if (s.episodes && s.episodes->count()) o.episodes = raw.episodes;
    if (!raw.checkpoint.empty()) o.checkpoint = raw.checkpoint;
    if (!raw.predictor.empty()) o.predictor = raw.predictor;
    if (!raw.log.empty()) o.log = raw.log;
    if (s.trials && s.trials->count()) o.trials = raw.trials;
    if (s.counts && s.counts->count()) o.counts = raw.counts;
    for (const auto& r : raw.runs) o.runs.emplace_back(r);
    return hh::run_command(s.app->get_name(), o, std::cout, std::cerr);
  }
  return hh::kExitConfig;
}
