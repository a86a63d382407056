#pragma once

#include <span>
#include <vector>

#include "highway_rl/numkit/tape.hpp"

namespace highway_rl::mdrnn {

/// Diagonal-covariance Gaussian mixture: m weights on the simplex, m x d
/// means and m x d strictly positive standard deviations.
struct GmmParams {
  std::vector<double> weights;
  numkit::Matrix means;
  numkit::Matrix stds;

  std::size_t components() const { return weights.size(); }
  std::size_t dim() const { return static_cast<std::size_t>(means.cols()); }
};

/// Head outputs -> mixture: softmax(logits), means as-is, stds = exp(raw) + floor.
/// `means` and `raw_std` are m*d values, component-major.
GmmParams gmm_from_raw(std::span<const double> logits, std::span<const double> means,
                       std::span<const double> raw_std, double sigma_floor);

/// -log sum_i w_i prod_j N(target_j; mu_ij, sigma_ij), via log-sum-exp.
double gmm_nll(const GmmParams& params, std::span<const double> target);

/// Taped mixture loss over a batch: returns sum_b row_weights[b] * nll_b as a
/// 1x1 node. logits B x m, means and raw_std B x (m*d), targets B x d.
numkit::Var gmm_nll_loss(numkit::Tape& tape, numkit::Var logits, numkit::Var means,
                         numkit::Var raw_std, const numkit::Matrix& targets,
                         std::span<const double> row_weights, double sigma_floor);

/// Per-row NLL for raw head outputs, without recording.
std::vector<double> gmm_nll_rows(const numkit::Matrix& logits, const numkit::Matrix& means,
                                 const numkit::Matrix& raw_std, const numkit::Matrix& targets,
                                 double sigma_floor);

}  // namespace highway_rl::mdrnn
