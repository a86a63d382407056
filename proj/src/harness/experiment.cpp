#include "highway_rl/harness/experiment.hpp"

#include <fstream>

#include "highway_rl/errors.hpp"
#include "highway_rl/json_fields.hpp"

namespace highway_rl::harness {

void ExperimentConfig::validate() const {
  scenario.validate();
  agent.validate();
  predictor.validate();
  if (protocol.episodes < 0) throw ConfigError("protocol.episodes: must be >= 0");
  if (protocol.eval_interval < 0) throw ConfigError("protocol.eval_interval: must be >= 0");
  if (protocol.eval_episodes < 0) throw ConfigError("protocol.eval_episodes: must be >= 0");
  if (sweep.trials < 0) throw ConfigError("sweep.trials: must be >= 0");
  for (int n : sweep.counts)
    if (n < 0) throw ConfigError("sweep.counts: vehicle counts must be >= 0");
  if (seeds.empty()) throw ConfigError("seeds: must not be empty");
}

nlohmann::json to_json(const ExperimentConfig& c) {
  return {{"scenario", sim::to_json(c.scenario)},
          {"agent", ddqn::to_json(c.agent)},
          {"predictor", mdrnn::to_json(c.predictor)},
          {"protocol",
           {{"episodes", c.protocol.episodes},
            {"eval_interval", c.protocol.eval_interval},
            {"eval_episodes", c.protocol.eval_episodes}}},
          {"sweep", {{"counts", c.sweep.counts}, {"trials", c.sweep.trials}}},
          {"seeds", c.seeds},
          {"output_dir", c.output_dir}};
}

ExperimentConfig experiment_from_json(const nlohmann::json& j) {
  ExperimentConfig c;
  FieldReader f(j, "config");
  c.scenario = sim::scenario_from_json(f.child("scenario"), "scenario");
  c.agent = ddqn::agent_from_json(f.child("agent"), "agent");
  c.predictor = mdrnn::predictor_from_json(f.child("predictor"), "predictor");
  {
    FieldReader p(f.child("protocol"), "protocol");
    p.read("episodes", c.protocol.episodes);
    p.read("eval_interval", c.protocol.eval_interval);
    p.read("eval_episodes", c.protocol.eval_episodes);
    p.finish();
  }
  {
    FieldReader s(f.child("sweep"), "sweep");
    s.read("counts", c.sweep.counts);
    s.read("trials", c.sweep.trials);
    s.finish();
  }
  f.read("seeds", c.seeds);
  f.read("output_dir", c.output_dir);
  f.finish();
  c.validate();
  return c;
}

void apply_override(nlohmann::json& doc, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) throw ConfigError("--override " + assignment + ": expected key=value");
  const std::string key = assignment.substr(0, eq);
  const std::string text = assignment.substr(eq + 1);
  nlohmann::json value = nlohmann::json::parse(text, nullptr, false);
  if (value.is_discarded()) value = text;

  nlohmann::json* node = &doc;
  std::size_t start = 0;
  for (;;) {
    const auto dot = key.find('.', start);
    const std::string part = key.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
    if (part.empty()) throw ConfigError("--override " + assignment + ": empty key segment");
    if (!node->is_object()) {
      if (!node->is_null()) throw ConfigError("--override " + key + ": " + part + " is not inside an object");
      *node = nlohmann::json::object();
    }
    if (dot == std::string::npos) {
      (*node)[part] = value;
      return;
    }
    node = &(*node)[part];
    start = dot + 1;
  }
}

ExperimentConfig load_experiment(const std::filesystem::path& path, const std::vector<std::string>& overrides) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path.string() + ": cannot open config file");
  nlohmann::json doc = nlohmann::json::parse(in, nullptr, false);
  if (doc.is_discarded()) throw ConfigError(path.string() + ": not valid JSON");
  for (const auto& o : overrides) apply_override(doc, o);
  return experiment_from_json(doc);
}

ExperimentConfig default_experiment(const std::vector<std::string>& overrides) {
  nlohmann::json doc = nlohmann::json::object();
  for (const auto& o : overrides) apply_override(doc, o);
  return experiment_from_json(doc);
}

}  // namespace highway_rl::harness
