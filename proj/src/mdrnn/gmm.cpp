#include "highway_rl/mdrnn/gmm.hpp"

#include <cmath>
#include <numbers>

#include "highway_rl/errors.hpp"
#include "highway_rl/numkit/ops.hpp"

namespace highway_rl::mdrnn {

using numkit::Matrix;
using numkit::Tape;
using numkit::Var;

namespace {

const double kHalfLog2Pi = 0.5 * std::log(2.0 * std::numbers::pi);

// One mixture row. Writes gradients w.r.t. logits / means / raw stds scaled
// by `gscale` when the output pointers are non-null.
double row_nll(const double* logits, const double* mu, const double* raw, const double* target,
               std::size_t m, std::size_t d, double floor, double gscale, double* g_logits,
               double* g_mu, double* g_raw) {
  std::vector<double> comp(m);
  const double lse_logits = numkit::log_sum_exp(std::span<const double>(logits, m));
  for (std::size_t i = 0; i < m; ++i) {
    double c = logits[i] - lse_logits;
    for (std::size_t j = 0; j < d; ++j) {
      const double sigma = std::exp(raw[i * d + j]) + floor;
      const double z = (target[j] - mu[i * d + j]) / sigma;
      c += -kHalfLog2Pi - std::log(sigma) - 0.5 * z * z;
    }
    comp[i] = c;
  }
  const double lse = numkit::log_sum_exp(comp);
  if (!g_logits) return -lse;

  for (std::size_t i = 0; i < m; ++i) {
    const double posterior = std::exp(comp[i] - lse);
    const double weight = std::exp(logits[i] - lse_logits);
    g_logits[i] += gscale * (weight - posterior);
    for (std::size_t j = 0; j < d; ++j) {
      const double e = std::exp(raw[i * d + j]);
      const double sigma = e + floor;
      const double z = (target[j] - mu[i * d + j]) / sigma;
      g_mu[i * d + j] += gscale * (-posterior * z / sigma);
      g_raw[i * d + j] += gscale * (-posterior * (z * z - 1.0) * e / sigma);
    }
  }
  return -lse;
}

void check_shapes(const Matrix& logits, const Matrix& means, const Matrix& raw, const Matrix& targets) {
  const auto m = logits.cols();
  const auto d = targets.cols();
  if (m < 1 || d < 1 || means.cols() != m * d || raw.cols() != m * d || means.rows() != logits.rows() ||
      raw.rows() != logits.rows() || targets.rows() != logits.rows())
    throw ConfigError("gmm loss: inconsistent head shapes");
}

}  // namespace

GmmParams gmm_from_raw(std::span<const double> logits, std::span<const double> means,
                       std::span<const double> raw_std, double sigma_floor) {
  const std::size_t m = logits.size();
  if (m == 0 || means.size() % m != 0 || raw_std.size() != means.size())
    throw ConfigError("gmm_from_raw: inconsistent sizes");
  const std::size_t d = means.size() / m;
  GmmParams p;
  p.weights = numkit::softmax(logits);
  p.means = Matrix(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(d));
  p.stds = Matrix(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(d));
  for (std::size_t k = 0; k < m * d; ++k) {
    p.means.data()[k] = means[k];
    p.stds.data()[k] = std::exp(raw_std[k]) + sigma_floor;
  }
  return p;
}

double gmm_nll(const GmmParams& p, std::span<const double> target) {
  const std::size_t m = p.components();
  const std::size_t d = p.dim();
  if (target.size() != d) throw ConfigError("gmm_nll: target dimension mismatch");
  std::vector<double> comp(m);
  for (std::size_t i = 0; i < m; ++i) {
    double c = std::log(p.weights[i]);
    for (std::size_t j = 0; j < d; ++j) {
      const double sigma = p.stds(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
      const double z = (target[j] - p.means(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j))) / sigma;
      c += -kHalfLog2Pi - std::log(sigma) - 0.5 * z * z;
    }
    comp[i] = c;
  }
  return -numkit::log_sum_exp(comp);
}

Var gmm_nll_loss(Tape& tape, Var logits, Var means, Var raw_std, const Matrix& targets,
                 std::span<const double> row_weights, double sigma_floor) {
  const Matrix& lv = tape.value(logits);
  const Matrix& mv = tape.value(means);
  const Matrix& rv = tape.value(raw_std);
  check_shapes(lv, mv, rv, targets);
  if (row_weights.size() != static_cast<std::size_t>(lv.rows()))
    throw ConfigError("gmm loss: one weight per batch row required");
  const auto m = static_cast<std::size_t>(lv.cols());
  const auto d = static_cast<std::size_t>(targets.cols());

  double total = 0.0;
  for (Eigen::Index b = 0; b < lv.rows(); ++b) {
    if (row_weights[static_cast<std::size_t>(b)] == 0.0) continue;
    total += row_weights[static_cast<std::size_t>(b)] *
             row_nll(lv.row(b).data(), mv.row(b).data(), rv.row(b).data(), targets.row(b).data(), m, d,
                     sigma_floor, 0.0, nullptr, nullptr, nullptr);
  }
  Matrix out(1, 1);
  out(0, 0) = total;
  std::vector<double> weights(row_weights.begin(), row_weights.end());
  return tape.record(std::move(out), {logits, means, raw_std},
                     [=, targets = targets, weights = std::move(weights)](Tape& tp, const Matrix& g) {
                       const Matrix& l = tp.value(logits);
                       const Matrix& mu = tp.value(means);
                       const Matrix& r = tp.value(raw_std);
                       Matrix gl = Matrix::Zero(l.rows(), l.cols());
                       Matrix gm = Matrix::Zero(mu.rows(), mu.cols());
                       Matrix gr = Matrix::Zero(r.rows(), r.cols());
                       for (Eigen::Index b = 0; b < l.rows(); ++b) {
                         const double w = weights[static_cast<std::size_t>(b)];
                         if (w == 0.0) continue;
                         row_nll(l.row(b).data(), mu.row(b).data(), r.row(b).data(), targets.row(b).data(),
                                 m, d, sigma_floor, w * g(0, 0), gl.row(b).data(), gm.row(b).data(),
                                 gr.row(b).data());
                       }
                       tp.accumulate(logits, gl);
                       tp.accumulate(means, gm);
                       tp.accumulate(raw_std, gr);
                     });
}

std::vector<double> gmm_nll_rows(const Matrix& logits, const Matrix& means, const Matrix& raw_std,
                                 const Matrix& targets, double sigma_floor) {
  check_shapes(logits, means, raw_std, targets);
  const auto m = static_cast<std::size_t>(logits.cols());
  const auto d = static_cast<std::size_t>(targets.cols());
  std::vector<double> out(static_cast<std::size_t>(logits.rows()));
  for (Eigen::Index b = 0; b < logits.rows(); ++b)
    out[static_cast<std::size_t>(b)] =
        row_nll(logits.row(b).data(), means.row(b).data(), raw_std.row(b).data(), targets.row(b).data(), m,
                d, sigma_floor, 0.0, nullptr, nullptr, nullptr);
  return out;
}

}  // namespace highway_rl::mdrnn
