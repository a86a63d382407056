#include "highway_rl/mdrnn/rollout.hpp"

#include "highway_rl/errors.hpp"
#include "highway_rl/numkit/ops.hpp"

namespace highway_rl::mdrnn {

using numkit::Matrix;

PredictedTrajectories predict_trajectories(const MdRnn& model, const sim::AffordanceVector& start_raw,
                                           int planned_action, const Matrix* hidden, const ActionPolicy* policy) {
  if (!model.trained()) throw ContractViolation("predict_trajectories: model has not been trained");
  const std::size_t m = model.components();
  const std::size_t k = model.horizon();
  const auto& norm = model.normalizer();
  const auto rows = static_cast<Eigen::Index>(m);

  Matrix h(rows, static_cast<Eigen::Index>(model.hidden_size()));
  if (hidden) {
    if (hidden->rows() != 1 || hidden->cols() != h.cols())
      throw ConfigError("predict_trajectories: hidden must be 1 x hidden_size");
    h.rowwise() = hidden->row(0);
  } else {
    h.setZero();
  }
  Matrix x(rows, static_cast<Eigen::Index>(kInputDim));
  x.rowwise() = MdRnn::encode(norm.normalize(start_raw), planned_action).row(0);

  PredictedTrajectories out(m, k);
  for (std::size_t step = 0; step < k; ++step) {
    h = model.advance(x, h);
    const MdRnn::Heads heads = model.heads(h);
    const Matrix& means = heads.means;
    if (step == 0) {
      // every row saw the same input, so row 0 carries the mixture weights
      const Eigen::RowVectorXd logits = heads.logits.row(0);
      const auto w = numkit::softmax(std::span<const double>(logits.data(), m));
      for (std::size_t i = 0; i < m; ++i) out.set_weight(i, w[i]);
    }
    for (std::size_t i = 0; i < m; ++i) {
      const auto r = static_cast<Eigen::Index>(i);
      sim::AffordanceVector next;
      for (std::size_t j = 0; j < kStateDim; ++j)
        next[j] = means(r, static_cast<Eigen::Index>(i * kStateDim + j));
      if (!means.row(r).allFinite()) throw TrainingError("predict_trajectories: non-finite prediction");
      out.at(i, step) = norm.denormalize(next);
      if (step + 1 < k) {
        const int a = policy && *policy ? (*policy)(out.at(i, step)) : planned_action;
        x.row(r) = MdRnn::encode(next, a).row(0);
      }
    }
  }
  return out;
}

MdRnnLookahead::MdRnnLookahead(const MdRnn& model, ActionPolicy policy)
    : model_(model), policy_(std::move(policy)), hidden_(model.zero_hidden()) {
  if (!model.trained()) throw ContractViolation("MdRnnLookahead: model has not been trained");
}

void MdRnnLookahead::reset() { hidden_ = model_.zero_hidden(); }

PredictedTrajectories MdRnnLookahead::predict(const sim::AffordanceVector& raw, int action) {
  return predict_trajectories(model_, raw, action, &hidden_, policy_ ? &policy_ : nullptr);
}

void MdRnnLookahead::observe(const sim::AffordanceVector& raw, int action) {
  hidden_ = model_.advance(MdRnn::encode(model_.normalizer().normalize(raw), action), hidden_);
}

}  // namespace highway_rl::mdrnn
