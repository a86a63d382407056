#include "highway_rl/mdrnn/mdrnn.hpp"

#include "highway_rl/errors.hpp"
#include "highway_rl/json_fields.hpp"
#include "highway_rl/numkit/serialize.hpp"

namespace highway_rl::mdrnn {

using numkit::Matrix;

void PredictorConfig::validate() const {
  if (m < 1) throw ConfigError("predictor.m: must be >= 1");
  if (k < 1) throw ConfigError("predictor.k: must be >= 1");
  if (hidden < 1) throw ConfigError("predictor.hidden: must be >= 1");
  if (!(learning_rate > 0.0)) throw ConfigError("predictor.learning_rate: must be > 0");
  if (epochs < 0) throw ConfigError("predictor.epochs: must be >= 0");
  if (!(sigma_floor > 0.0)) throw ConfigError("predictor.sigma_floor: must be > 0");
  if (tbptt_length < 1) throw ConfigError("predictor.tbptt_length: must be >= 1");
  if (batch_streams < 1) throw ConfigError("predictor.batch_streams: must be >= 1");
  if (!(holdout_fraction >= 0.0 && holdout_fraction < 1.0))
    throw ConfigError("predictor.holdout_fraction: must be in [0, 1)");
  if (!(grad_clip >= 0.0)) throw ConfigError("predictor.grad_clip: must be >= 0");
  if (collect_episodes < 0) throw ConfigError("predictor.collect_episodes: must be >= 0");
  if (!(collect_epsilon >= 0.0 && collect_epsilon <= 1.0))
    throw ConfigError("predictor.collect_epsilon: must be in [0, 1]");
}

nlohmann::json to_json(const PredictorConfig& c) {
  return {{"m", c.m},
          {"k", c.k},
          {"hidden", c.hidden},
          {"learning_rate", c.learning_rate},
          {"epochs", c.epochs},
          {"sigma_floor", c.sigma_floor},
          {"tbptt_length", c.tbptt_length},
          {"batch_streams", c.batch_streams},
          {"holdout_fraction", c.holdout_fraction},
          {"grad_clip", c.grad_clip},
          {"rollout_actions", c.rollout_actions == RolloutActions::RepeatPlanned ? "repeat" : "greedy"},
          {"collect_episodes", c.collect_episodes},
          {"collect_epsilon", c.collect_epsilon}};
}

PredictorConfig predictor_from_json(const nlohmann::json& j, const std::string& path) {
  PredictorConfig c;
  FieldReader f(j, path);
  f.read("m", c.m);
  f.read("k", c.k);
  f.read("hidden", c.hidden);
  f.read("learning_rate", c.learning_rate);
  f.read("epochs", c.epochs);
  f.read("sigma_floor", c.sigma_floor);
  f.read("tbptt_length", c.tbptt_length);
  f.read("batch_streams", c.batch_streams);
  f.read("holdout_fraction", c.holdout_fraction);
  f.read("grad_clip", c.grad_clip);
  std::string rollout = "repeat";
  f.read("rollout_actions", rollout);
  if (rollout == "repeat") {
    c.rollout_actions = RolloutActions::RepeatPlanned;
  } else if (rollout == "greedy") {
    c.rollout_actions = RolloutActions::GreedyPolicy;
  } else {
    throw ConfigError(f.field("rollout_actions") + ": expected \"repeat\" or \"greedy\"");
  }
  f.read("collect_episodes", c.collect_episodes);
  f.read("collect_epsilon", c.collect_epsilon);
  f.finish();
  c.validate();
  return c;
}

MdRnn::MdRnn(std::size_t m, std::size_t hidden, std::size_t horizon, double sigma_floor,
             sim::Normalizer normalizer)
    : m_(m), hidden_(hidden), horizon_(horizon), sigma_floor_(sigma_floor), normalizer_(normalizer) {
  if (m < 1 || hidden < 1 || horizon < 1) throw ConfigError("MdRnn: m, hidden and horizon must be >= 1");
  cell_ = numkit::RecurrentCell::create(params_, "rnn", kInputDim, hidden);
  logits_head_ = numkit::Dense::create(params_, "head.logits", hidden, m);
  means_head_ = numkit::Dense::create(params_, "head.means", hidden, m * kStateDim);
  std_head_ = numkit::Dense::create(params_, "head.log_std", hidden, m * kStateDim);
}

void MdRnn::init(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  params_.init_uniform_fan_in(rng);
}

Matrix MdRnn::encode(const sim::AffordanceVector& normalized, int action) {
  if (action < 0 || action >= sim::kNumActions) throw ConfigError("MdRnn: action id out of range");
  Matrix x = Matrix::Zero(1, kInputDim);
  for (std::size_t i = 0; i < kStateDim; ++i) x(0, static_cast<Eigen::Index>(i)) = normalized[i];
  x(0, static_cast<Eigen::Index>(kStateDim) + action) = 1.0;
  return x;
}

Matrix MdRnn::zero_hidden(std::size_t rows) const {
  return Matrix::Zero(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(hidden_));
}

MdRnn::Taped MdRnn::step(numkit::Tape& tape, numkit::Var input, numkit::Var hidden) {
  Taped out;
  out.hidden = cell_.step(tape, params_, input, hidden);
  out.logits = logits_head_.forward(tape, params_, out.hidden);
  out.means = means_head_.forward(tape, params_, out.hidden);
  out.raw_std = std_head_.forward(tape, params_, out.hidden);
  return out;
}

Matrix MdRnn::advance(const Matrix& inputs, const Matrix& hidden) const {
  return cell_.apply(params_, inputs, hidden);
}

MdRnn::Heads MdRnn::heads(const Matrix& hidden) const {
  return Heads{logits_head_.apply(params_, hidden), means_head_.apply(params_, hidden),
               std_head_.apply(params_, hidden)};
}

std::pair<GmmParams, Matrix> MdRnn::forward(const sim::AffordanceVector& normalized, int action,
                                            const Matrix& hidden) const {
  if (hidden.rows() != 1 || hidden.cols() != static_cast<Eigen::Index>(hidden_))
    throw ConfigError("MdRnn::forward: hidden must be 1 x " + std::to_string(hidden_));
  Matrix h = advance(encode(normalized, action), hidden);
  Heads out = heads(h);
  GmmParams gmm = gmm_from_raw({out.logits.data(), static_cast<std::size_t>(out.logits.size())},
                               {out.means.data(), static_cast<std::size_t>(out.means.size())},
                               {out.raw_std.data(), static_cast<std::size_t>(out.raw_std.size())},
                               sigma_floor_);
  if (!gmm.means.allFinite() || !gmm.stds.allFinite())
    throw TrainingError("MdRnn::forward produced non-finite mixture parameters");
  return {std::move(gmm), std::move(h)};
}

nlohmann::ordered_json MdRnn::metadata() const {
  nlohmann::ordered_json md;
  md["kind"] = "mdrnn";
  md["m"] = m_;
  md["k"] = horizon_;
  md["hidden"] = hidden_;
  md["sigma_floor"] = sigma_floor_;
  md["state_dim"] = kStateDim;
  md["num_actions"] = sim::kNumActions;
  md["normalization"] = {{"d_sense", normalizer_.d_sense},
                         {"v_max", normalizer_.v_max},
                         {"road_width", normalizer_.road_width}};
  md["trained"] = trained_;
  return md;
}

void MdRnn::save(const std::filesystem::path& path) const { numkit::save_params(params_, path, metadata()); }

MdRnn MdRnn::load(const std::filesystem::path& path) {
  const auto doc = numkit::read_param_file(path);
  if (!doc.contains("metadata") || doc["metadata"].value("kind", "") != "mdrnn")
    throw FormatError(path.string() + ": not an MD-RNN checkpoint");
  const auto& md = doc["metadata"];
  try {
    if (md.at("state_dim").get<std::size_t>() != kStateDim ||
        md.at("num_actions").get<int>() != sim::kNumActions)
      throw FormatError(path.string() + ": state/action dimensions differ from this build");
    const auto& n = md.at("normalization");
    MdRnn model(md.at("m").get<std::size_t>(), md.at("hidden").get<std::size_t>(),
                md.at("k").get<std::size_t>(), md.at("sigma_floor").get<double>(),
                sim::Normalizer{n.at("d_sense").get<double>(), n.at("v_max").get<double>(),
                                n.at("road_width").get<double>()});
    numkit::load_params_into(model.params_, doc);
    model.trained_ = md.value("trained", false);
    return model;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(path.string() + ": bad MD-RNN metadata: " + e.what());
  } catch (const ConfigError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

}  // namespace highway_rl::mdrnn
