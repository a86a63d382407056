#include "highway_rl/numkit/optimizer.hpp"

#include <cmath>
#include <string>

#include "highway_rl/errors.hpp"

namespace highway_rl::numkit {

void Optimizer::step(ParamSet& params, double lr) {
  double sq_norm = 0.0;
  for (const auto& p : params) {
    if (!p.grad.allFinite())
      throw TrainingError("non-finite gradient in parameter '" + p.name + "' at optimizer step " +
                          std::to_string(t_ + 1));
    sq_norm += p.grad.squaredNorm();
  }
  double clip = 1.0;
  if (cfg_.clip_norm > 0.0) {
    const double norm = std::sqrt(sq_norm);
    if (norm > cfg_.clip_norm) clip = cfg_.clip_norm / norm;
  }

  ++t_;
  if (cfg_.kind == OptimizerKind::Sgd) {
    for (auto& p : params) {
      p.value -= (lr * clip) * p.grad;
      p.zero_grad();
    }
    return;
  }

  if (m_.size() != params.size()) {
    m_.clear();
    v_.clear();
    for (const auto& p : params) {
      m_.push_back(Matrix::Zero(p.value.rows(), p.value.cols()));
      v_.push_back(Matrix::Zero(p.value.rows(), p.value.cols()));
    }
  }
  const double bc1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(t_));
  const double bc2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(t_));
  std::size_t i = 0;
  for (auto& p : params) {
    const Matrix g = p.grad * clip;
    m_[i] = cfg_.beta1 * m_[i] + (1.0 - cfg_.beta1) * g;
    v_[i] = cfg_.beta2 * v_[i] + (1.0 - cfg_.beta2) * g.cwiseProduct(g);
    p.value.array() -=
        lr * (m_[i].array() / bc1) / ((v_[i].array() / bc2).sqrt() + cfg_.epsilon);
    p.zero_grad();
    ++i;
  }
}

}  // namespace highway_rl::numkit
