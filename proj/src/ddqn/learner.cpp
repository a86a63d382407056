#include "highway_rl/ddqn/learner.hpp"

#include <cmath>
#include <sstream>

#include "highway_rl/errors.hpp"

namespace highway_rl::ddqn {

using numkit::Matrix;

int greedy_action(const QValues& q, const ActionMask* mask) {
  int best = -1;
  for (int a = 0; a < sim::kNumActions; ++a) {
    if (mask && !(*mask)[static_cast<std::size_t>(a)]) continue;
    if (best < 0 || q[static_cast<std::size_t>(a)] > q[static_cast<std::size_t>(best)]) best = a;
  }
  if (best < 0) throw ContractViolation("greedy_action: mask excludes every action");
  return best;
}

int select_action(const QValues& q, double epsilon, std::mt19937_64& rng, const ActionMask* mask) {
  if (!(epsilon >= 0.0 && epsilon <= 1.0)) throw ContractViolation("select_action: epsilon outside [0, 1]");
  std::uniform_real_distribution<double> u(0.0, 1.0);
  if (u(rng) < epsilon) {
    std::vector<int> allowed;
    for (int a = 0; a < sim::kNumActions; ++a)
      if (!mask || (*mask)[static_cast<std::size_t>(a)]) allowed.push_back(a);
    if (allowed.empty()) throw ContractViolation("select_action: mask excludes every action");
    std::uniform_int_distribution<std::size_t> pick(0, allowed.size() - 1);
    return allowed[pick(rng)];
  }
  return greedy_action(q, mask);
}

double td_target(const Sample& s, const QNetwork& online, const QNetwork& target, double gamma) {
  const Sample batch[1] = {s};
  return td_targets(batch, online, target, gamma)[0];
}

std::vector<double> td_targets(std::span<const Sample> batch, const QNetwork& online, const QNetwork& target,
                               double gamma) {
  std::vector<double> y(batch.size());
  std::vector<sim::AffordanceVector> next;
  std::vector<std::size_t> rows;
  for (std::size_t i = 0; i < batch.size(); ++i) {
    const Transition& t = batch[i].transition;
    y[i] = t.reward;
    if (batch[i].from_collision || !t.next_state) continue;
    next.push_back(*t.next_state);
    rows.push_back(i);
  }
  if (next.empty()) return y;
  const Matrix x = states_matrix(next);
  const Matrix q_online = online.values(x);
  const Matrix q_target = target.values(x);
  for (std::size_t r = 0; r < rows.size(); ++r) {
    Eigen::Index best = 0;
    for (Eigen::Index a = 1; a < q_online.cols(); ++a)
      if (q_online(static_cast<Eigen::Index>(r), a) > q_online(static_cast<Eigen::Index>(r), best)) best = a;
    y[rows[r]] += gamma * q_target(static_cast<Eigen::Index>(r), best);
  }
  return y;
}

numkit::Var selected_mse(numkit::Tape& tape, numkit::Var q, std::span<const int> actions,
                         std::span<const double> targets) {
  const Matrix& qv = tape.value(q);
  const auto n = qv.rows();
  if (static_cast<std::size_t>(n) != actions.size() || actions.size() != targets.size() || n == 0)
    throw ConfigError("selected_mse: batch size mismatch");
  std::vector<int> acts(actions.begin(), actions.end());
  std::vector<double> err(static_cast<std::size_t>(n));
  double loss = 0.0;
  for (Eigen::Index b = 0; b < n; ++b) {
    const int a = acts[static_cast<std::size_t>(b)];
    if (a < 0 || a >= qv.cols()) throw ConfigError("selected_mse: action id out of range");
    err[static_cast<std::size_t>(b)] = qv(b, a) - targets[static_cast<std::size_t>(b)];
    loss += err[static_cast<std::size_t>(b)] * err[static_cast<std::size_t>(b)];
  }
  Matrix out(1, 1);
  out(0, 0) = loss / static_cast<double>(n);
  const auto cols = qv.cols();
  return tape.record(std::move(out), {q}, [q, acts = std::move(acts), err = std::move(err), n, cols](
                                             numkit::Tape& t, const Matrix& g) {
    Matrix dq = Matrix::Zero(n, cols);
    for (Eigen::Index b = 0; b < n; ++b)
      dq(b, acts[static_cast<std::size_t>(b)]) = 2.0 * err[static_cast<std::size_t>(b)] * g(0, 0) / static_cast<double>(n);
    t.accumulate(q, dq);
  });
}

namespace {

std::string dump_batch(std::span<const Sample> batch, std::span<const double> targets) {
  std::ostringstream os;
  os.precision(17);
  for (std::size_t i = 0; i < batch.size(); ++i) {
    const Transition& t = batch[i].transition;
    os << "\n  [" << i << "] " << (batch[i].from_collision ? "collision" : "safe") << " a=" << t.action
       << " r=" << t.reward << " y=" << targets[i] << " s=(";
    for (std::size_t c = 0; c < sim::kAffordanceDim; ++c) os << (c ? "," : "") << t.state[c];
    os << ")";
  }
  return os.str();
}

}  // namespace

double train_step(std::span<const Sample> batch, QNetwork& online, const QNetwork& target,
                  numkit::Optimizer& optimizer, double learning_rate, double gamma) {
  if (batch.empty()) throw ContractViolation("train_step: empty batch");
  const std::vector<double> y = td_targets(batch, online, target, gamma);
  std::vector<sim::AffordanceVector> states;
  std::vector<int> actions;
  states.reserve(batch.size());
  actions.reserve(batch.size());
  for (const auto& s : batch) {
    states.push_back(s.transition.state);
    actions.push_back(s.transition.action);
  }
  numkit::Tape tape;
  const auto x = tape.constant(states_matrix(states));
  const auto q = online.forward(tape, x);
  const auto loss = selected_mse(tape, q, actions, y);
  const double value = tape.value(loss)(0, 0);
  if (!std::isfinite(value))
    throw TrainingError("non-finite TD loss (" + std::to_string(value) + ") on batch:" + dump_batch(batch, y));
  online.params().zero_grad();
  tape.backward(loss);
  optimizer.step(online.params(), learning_rate);
  return value;
}

void sync_target(const QNetwork& online, QNetwork& target) { target.params().copy_values_from(online.params()); }

}  // namespace highway_rl::ddqn
