#include "highway_rl/ddqn/qnetwork.hpp"

#include <random>

#include "highway_rl/errors.hpp"
#include "highway_rl/numkit/serialize.hpp"

namespace highway_rl::ddqn {

using numkit::Matrix;

QNetwork::QNetwork(std::vector<std::size_t> hidden) : hidden_(std::move(hidden)) {
  std::size_t in = sim::kAffordanceDim;
  for (std::size_t i = 0; i < hidden_.size(); ++i) {
    if (hidden_[i] == 0) throw ConfigError("QNetwork: hidden sizes must be positive");
    layers_.push_back(numkit::Dense::create(params_, "q.layer" + std::to_string(i), in, hidden_[i]));
    in = hidden_[i];
  }
  layers_.push_back(numkit::Dense::create(params_, "q.out", in, sim::kNumActions));
}

void QNetwork::init(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  params_.init_uniform_fan_in(rng);
}

numkit::Var QNetwork::forward(numkit::Tape& tape, numkit::Var states) {
  numkit::Var h = states;
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    h = layers_[i].forward(tape, params_, h);
    if (i + 1 < layers_.size()) h = numkit::relu(tape, h);
  }
  return h;
}

Matrix QNetwork::values(const Matrix& states) const {
  Matrix h = states;
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    h = layers_[i].apply(params_, h);
    if (i + 1 < layers_.size()) h = h.cwiseMax(0.0);
  }
  return h;
}

QValues QNetwork::values(const sim::AffordanceVector& normalized) const {
  Matrix x(1, static_cast<Eigen::Index>(sim::kAffordanceDim));
  for (std::size_t i = 0; i < sim::kAffordanceDim; ++i) x(0, static_cast<Eigen::Index>(i)) = normalized[i];
  const Matrix q = values(x);
  QValues out;
  for (int a = 0; a < sim::kNumActions; ++a) out[static_cast<std::size_t>(a)] = q(0, a);
  return out;
}

void QNetwork::save(const std::filesystem::path& path, const nlohmann::ordered_json& extra) const {
  nlohmann::ordered_json md;
  md["kind"] = "qnet";
  md["hidden"] = hidden_;
  md["state_dim"] = sim::kAffordanceDim;
  md["num_actions"] = sim::kNumActions;
  if (extra.is_object())
    for (const auto& [k, v] : extra.items()) md[k] = v;
  numkit::save_params(params_, path, md);
}

QNetwork QNetwork::load(const std::filesystem::path& path) {
  const auto doc = numkit::read_param_file(path);
  if (!doc.contains("metadata") || doc["metadata"].value("kind", "") != "qnet")
    throw FormatError(path.string() + ": not a Q-network checkpoint");
  try {
    const auto& md = doc["metadata"];
    if (md.at("state_dim").get<std::size_t>() != sim::kAffordanceDim ||
        md.at("num_actions").get<int>() != sim::kNumActions)
      throw FormatError(path.string() + ": state/action dimensions differ from this build");
    QNetwork q(md.at("hidden").get<std::vector<std::size_t>>());
    numkit::load_params_into(q.params_, doc);
    return q;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(path.string() + ": bad Q-network metadata: " + e.what());
  } catch (const ConfigError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

Matrix states_matrix(const std::vector<sim::AffordanceVector>& states) {
  Matrix x(static_cast<Eigen::Index>(states.size()), static_cast<Eigen::Index>(sim::kAffordanceDim));
  for (std::size_t r = 0; r < states.size(); ++r)
    for (std::size_t c = 0; c < sim::kAffordanceDim; ++c)
      x(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = states[r][c];
  return x;
}

}  // namespace highway_rl::ddqn
