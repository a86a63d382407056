#include "highway_rl/numkit/param.hpp"

#include <cmath>

#include "highway_rl/errors.hpp"

namespace highway_rl::numkit {

namespace {

std::pair<Eigen::Index, Eigen::Index> storage_dims(const std::vector<std::size_t>& shape) {
  if (shape.size() == 1) return {1, static_cast<Eigen::Index>(shape[0])};
  if (shape.size() == 2)
    return {static_cast<Eigen::Index>(shape[0]), static_cast<Eigen::Index>(shape[1])};
  throw ConfigError("parameter tensors must have rank 1 or 2");
}

std::string shape_str(const std::vector<std::size_t>& shape) {
  std::string s = "[";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) s += ",";
    s += std::to_string(shape[i]);
  }
  return s + "]";
}

}  // namespace

ParamTensor::ParamTensor(std::string n, std::vector<std::size_t> s)
    : name(std::move(n)), shape(std::move(s)) {
  auto [r, c] = storage_dims(shape);
  value = Matrix::Zero(r, c);
  grad = Matrix::Zero(r, c);
}

std::size_t ParamSet::add(std::string name, std::vector<std::size_t> shape) {
  if (find(name) != size()) throw ConfigError("duplicate parameter name '" + name + "'");
  tensors_.emplace_back(std::move(name), std::move(shape));
  return tensors_.size() - 1;
}

std::size_t ParamSet::total_values() const {
  std::size_t n = 0;
  for (const auto& t : tensors_) n += t.size();
  return n;
}

std::size_t ParamSet::find(std::string_view name) const {
  for (std::size_t i = 0; i < tensors_.size(); ++i)
    if (tensors_[i].name == name) return i;
  return tensors_.size();
}

void ParamSet::zero_grad() {
  for (auto& t : tensors_) t.zero_grad();
}

void ParamSet::init_uniform_fan_in(std::mt19937_64& rng) {
  for (auto& t : tensors_) {
    const double fan_in = static_cast<double>(t.shape.back());
    const double bound = 1.0 / std::sqrt(fan_in);
    std::uniform_real_distribution<double> dist(-bound, bound);
    for (Eigen::Index i = 0; i < t.value.size(); ++i) t.value.data()[i] = dist(rng);
  }
}

void ParamSet::copy_values_from(const ParamSet& other) {
  if (other.size() != size())
    throw ConfigError("parameter sets differ in tensor count (" + std::to_string(size()) +
                      " vs " + std::to_string(other.size()) + ")");
  for (std::size_t i = 0; i < size(); ++i) {
    const auto& src = other.tensors_[i];
    auto& dst = tensors_[i];
    if (src.name != dst.name || src.shape != dst.shape)
      throw ConfigError("parameter mismatch: '" + dst.name + "' " + shape_str(dst.shape) +
                        " vs '" + src.name + "' " + shape_str(src.shape));
    dst.value = src.value;
  }
}

}  // namespace highway_rl::numkit
