#pragma once

#include <cstddef>
#include <functional>
#include <limits>
#include <vector>

#include "highway_rl/numkit/param.hpp"

namespace highway_rl::numkit {

/// Handle to a node recorded on a Tape.
struct Var {
  static constexpr std::size_t kNone = std::numeric_limits<std::size_t>::max();
  std::size_t id = kNone;
  bool valid() const { return id != kNone; }
};

/// Reverse-mode gradient tape. Every op appends one node holding its forward
/// value and a closure that maps the node's output gradient to its inputs.
/// Parameter leaves reference a ParamTensor, which must outlive the tape.
class Tape {
 public:
  /// Distributes this node's output gradient onto its inputs via accumulate().
  using BackwardFn = std::function<void(Tape&, const Matrix& out_grad)>;

  Var constant(Matrix value);
  Var param(ParamTensor& p);

  /// Appends an op node. `inputs` decide whether the node needs a gradient.
  Var record(Matrix value, std::initializer_list<Var> inputs, BackwardFn backward);

  const Matrix& value(Var v) const;
  /// Gradient of the last backward() loss w.r.t. node `v`.
  const Matrix& grad(Var v) const;
  bool requires_grad(Var v) const { return node(v).requires_grad; }

  /// Adds `g` into the gradient slot of `v`; no-op for constants.
  void accumulate(Var v, const Matrix& g);

  /// Runs the reverse sweep from a scalar (1x1) loss. Node gradients are reset
  /// first; parameter gradients accumulate across calls until zeroed.
  /// Returns the number of op nodes whose backward closure ran.
  std::size_t backward(Var loss, double loss_grad = 1.0);

  /// Op node ids in the order the last backward() visited them.
  const std::vector<std::size_t>& last_visit_order() const { return visit_order_; }

  std::size_t size() const { return nodes_.size(); }
  void clear();

 private:
  struct Node {
    Matrix value;
    const Matrix* ref = nullptr;  // parameter leaves read the tensor in place
    Matrix grad;
    ParamTensor* param = nullptr;
    BackwardFn backward;
    bool requires_grad = false;
  };

  const Node& node(Var v) const;
  Node& node(Var v);

  std::vector<Node> nodes_;
  std::vector<std::size_t> visit_order_;
};

}  // namespace highway_rl::numkit
