#pragma once

#include <Eigen/Core>

#include <cstddef>
#include <cstdint>
#include <random>
#include <string>
#include <string_view>
#include <vector>

namespace highway_rl::numkit {

using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// A named, trainable block of reals with its gradient accumulator.
///
/// Shapes are either {n} (stored as a 1 x n row so it broadcasts over batch
/// rows) or {rows, cols}.
struct ParamTensor {
  std::string name;
  std::vector<std::size_t> shape;
  Matrix value;
  Matrix grad;

  ParamTensor(std::string name, std::vector<std::size_t> shape);

  std::size_t size() const { return static_cast<std::size_t>(value.size()); }
  void zero_grad() { grad.setZero(); }
};

/// Ordered parameter collection owned by one network. Layers refer to their
/// tensors by index, so copies of a ParamSet are fully independent.
class ParamSet {
 public:
  std::size_t add(std::string name, std::vector<std::size_t> shape);

  ParamTensor& operator[](std::size_t i) { return tensors_.at(i); }
  const ParamTensor& operator[](std::size_t i) const { return tensors_.at(i); }

  std::size_t size() const { return tensors_.size(); }
  bool empty() const { return tensors_.empty(); }
  std::size_t total_values() const;

  /// Index of the tensor called `name`, or size() if absent.
  std::size_t find(std::string_view name) const;

  void zero_grad();

  /// Uniform in [-1/sqrt(fan_in), +1/sqrt(fan_in)]; fan_in is the last dim.
  void init_uniform_fan_in(std::mt19937_64& rng);

  /// Copies values from `other`; throws ConfigError on any shape or name mismatch.
  void copy_values_from(const ParamSet& other);

  auto begin() { return tensors_.begin(); }
  auto end() { return tensors_.end(); }
  auto begin() const { return tensors_.begin(); }
  auto end() const { return tensors_.end(); }

 private:
  std::vector<ParamTensor> tensors_;
};

}  // namespace highway_rl::numkit
