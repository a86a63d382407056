#include "highway_rl/mdrnn/training.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include "highway_rl/errors.hpp"
#include "highway_rl/numkit/ops.hpp"
#include "highway_rl/numkit/optimizer.hpp"

namespace highway_rl::mdrnn {

using numkit::Matrix;
using numkit::Tape;
using numkit::Var;

namespace {

using Episodes = std::vector<std::span<const LogRecord>>;

// Episodes laid end to end; several streams advance in lockstep as batch rows.
struct Stream {
  Matrix inputs;   // len x kInputDim
  Matrix targets;  // len x kStateDim
  std::vector<char> valid;  // row has a next-state target
  std::vector<char> reset;  // first step of an episode
  std::size_t len = 0;
};

std::vector<Stream> build_streams(std::span<const std::span<const LogRecord>> episodes, std::size_t n_streams) {
  n_streams = std::max<std::size_t>(1, std::min(n_streams, episodes.size()));
  std::vector<std::vector<std::size_t>> assign(n_streams);
  for (std::size_t i = 0; i < episodes.size(); ++i) assign[i % n_streams].push_back(i);

  std::vector<Stream> streams(n_streams);
  for (std::size_t s = 0; s < n_streams; ++s) {
    Stream& st = streams[s];
    for (std::size_t e : assign[s]) st.len += episodes[e].size();
    st.inputs = Matrix::Zero(static_cast<Eigen::Index>(st.len), kInputDim);
    st.targets = Matrix::Zero(static_cast<Eigen::Index>(st.len), kStateDim);
    st.valid.assign(st.len, 0);
    st.reset.assign(st.len, 0);
    std::size_t row = 0;
    for (std::size_t e : assign[s]) {
      const auto& ep = episodes[e];
      for (std::size_t t = 0; t < ep.size(); ++t, ++row) {
        const auto r = static_cast<Eigen::Index>(row);
        st.inputs.row(r) = MdRnn::encode(ep[t].state, ep[t].action);
        st.reset[row] = t == 0;
        if (t + 1 < ep.size()) {
          st.valid[row] = 1;
          for (std::size_t j = 0; j < kStateDim; ++j)
            st.targets(r, static_cast<Eigen::Index>(j)) = ep[t + 1].state[j];
        }
      }
    }
  }
  return streams;
}

struct Slice {
  Matrix inputs, targets, keep;
  std::vector<double> valid;
  bool any_reset = false;
  std::size_t n_valid = 0;
};

Slice slice_at(const std::vector<Stream>& streams, std::size_t t, std::size_t hidden) {
  const auto b = static_cast<Eigen::Index>(streams.size());
  Slice s;
  s.inputs = Matrix::Zero(b, kInputDim);
  s.targets = Matrix::Zero(b, kStateDim);
  s.keep = Matrix::Ones(b, static_cast<Eigen::Index>(hidden));
  s.valid.assign(streams.size(), 0.0);
  for (std::size_t i = 0; i < streams.size(); ++i) {
    const Stream& st = streams[i];
    const auto r = static_cast<Eigen::Index>(i);
    if (t >= st.len) continue;
    s.inputs.row(r) = st.inputs.row(static_cast<Eigen::Index>(t));
    s.targets.row(r) = st.targets.row(static_cast<Eigen::Index>(t));
    if (st.reset[t]) {
      s.keep.row(r).setZero();
      s.any_reset = true;
    }
    if (st.valid[t]) {
      s.valid[i] = 1.0;
      ++s.n_valid;
    }
  }
  return s;
}

std::size_t max_len(const std::vector<Stream>& streams) {
  std::size_t n = 0;
  for (const auto& s : streams) n = std::max(n, s.len);
  return n;
}

std::size_t count_pairs(std::span<const std::span<const LogRecord>> episodes) {
  std::size_t n = 0;
  for (const auto& e : episodes) n += e.empty() ? 0 : e.size() - 1;
  return n;
}

}  // namespace

double evaluate_nll(const MdRnn& model, std::span<const std::span<const LogRecord>> episodes,
                    std::size_t n_streams) {
  if (count_pairs(episodes) == 0) return std::numeric_limits<double>::quiet_NaN();
  const auto streams = build_streams(episodes, n_streams);
  Matrix h = model.zero_hidden(streams.size());
  double total = 0.0;
  std::size_t count = 0;
  const std::size_t len = max_len(streams);
  for (std::size_t t = 0; t < len; ++t) {
    Slice s = slice_at(streams, t, model.hidden_size());
    if (s.any_reset) h = h.cwiseProduct(s.keep);
    h = model.advance(s.inputs, h);
    if (s.n_valid == 0) continue;
    const auto out = model.heads(h);
    const auto nll = gmm_nll_rows(out.logits, out.means, out.raw_std, s.targets, model.sigma_floor());
    for (std::size_t i = 0; i < nll.size(); ++i)
      if (s.valid[i] != 0.0) {
        total += nll[i];
        ++count;
      }
  }
  return total / static_cast<double>(count);
}

TrainReport train_offline(MdRnn& model, const DrivingLog& log, const PredictorConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  if (log.empty()) throw ConfigError("train_offline: driving log is empty");
  const Episodes all = log.episodes();

  std::mt19937_64 rng(seed);
  std::vector<std::size_t> order(all.size());
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);
  std::size_t n_hold = 0;
  if (all.size() >= 2)
    n_hold = std::clamp<std::size_t>(static_cast<std::size_t>(std::llround(cfg.holdout_fraction * all.size())),
                                     cfg.holdout_fraction > 0.0 ? 1 : 0, all.size() - 1);
  Episodes held, train;
  for (std::size_t i = 0; i < order.size(); ++i) (i < n_hold ? held : train).push_back(all[order[i]]);
  if (count_pairs(train) == 0) throw ConfigError("train_offline: log has no transitions to fit");

  TrainReport report;
  report.train_pairs = count_pairs(train);
  report.heldout_pairs = count_pairs(held);
  report.train_episodes = train.size();
  report.heldout_episodes = held.size();
  const auto streams_n = static_cast<std::size_t>(cfg.batch_streams);
  auto record_epoch = [&](int epoch) {
    report.epochs.push_back(
        EpochReport{epoch, evaluate_nll(model, train, streams_n), evaluate_nll(model, held, streams_n)});
  };
  record_epoch(0);

  numkit::OptimizerConfig ocfg;
  ocfg.clip_norm = cfg.grad_clip;
  numkit::Optimizer opt(ocfg);
  const auto chunk = static_cast<std::size_t>(cfg.tbptt_length);

  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    std::shuffle(train.begin(), train.end(), rng);
    const auto streams = build_streams(train, streams_n);
    const std::size_t len = max_len(streams);
    Matrix h_carry = model.zero_hidden(streams.size());

    for (std::size_t t0 = 0; t0 < len; t0 += chunk) {
      const std::size_t t1 = std::min(len, t0 + chunk);
      std::vector<Slice> slices;
      std::size_t n_valid = 0;
      for (std::size_t t = t0; t < t1; ++t) {
        slices.push_back(slice_at(streams, t, model.hidden_size()));
        n_valid += slices.back().n_valid;
      }

      Tape tape;
      Var h = tape.constant(h_carry);
      Var loss;
      for (auto& s : slices) {
        if (s.any_reset) h = numkit::mul(tape, h, tape.constant(s.keep));
        auto step = model.step(tape, tape.constant(s.inputs), h);
        h = step.hidden;
        if (s.n_valid == 0) continue;
        std::vector<double> w(s.valid.size());
        for (std::size_t i = 0; i < w.size(); ++i) w[i] = s.valid[i] / static_cast<double>(n_valid);
        Var l = gmm_nll_loss(tape, step.logits, step.means, step.raw_std, s.targets, w, model.sigma_floor());
        loss = loss.valid() ? numkit::add(tape, loss, l) : l;
      }
      h_carry = tape.value(h);
      if (!loss.valid()) continue;
      if (!std::isfinite(tape.value(loss)(0, 0)))
        throw TrainingError("MD-RNN training loss became non-finite in epoch " + std::to_string(epoch));
      tape.backward(loss);
      opt.step(model.params(), cfg.learning_rate);
    }
    record_epoch(epoch);
  }
  model.set_trained(true);
  return report;
}

}  // namespace highway_rl::mdrnn
