#include "highway_rl/numkit/tape.hpp"

#include <string>

#include "highway_rl/errors.hpp"

namespace highway_rl::numkit {

Var Tape::constant(Matrix value) {
  Node n;
  n.value = std::move(value);
  nodes_.push_back(std::move(n));
  return Var{nodes_.size() - 1};
}

Var Tape::param(ParamTensor& p) {
  Node n;
  n.ref = &p.value;
  n.param = &p;
  n.requires_grad = true;
  nodes_.push_back(std::move(n));
  return Var{nodes_.size() - 1};
}

Var Tape::record(Matrix value, std::initializer_list<Var> inputs, BackwardFn backward) {
  Node n;
  n.value = std::move(value);
  for (Var in : inputs) {
    if (node(in).requires_grad) {
      n.requires_grad = true;
      break;
    }
  }
  if (n.requires_grad) n.backward = std::move(backward);
  nodes_.push_back(std::move(n));
  return Var{nodes_.size() - 1};
}

const Tape::Node& Tape::node(Var v) const {
  if (v.id >= nodes_.size())
    throw ContractViolation("tape variable " + std::to_string(v.id) + " was not recorded");
  return nodes_[v.id];
}

Tape::Node& Tape::node(Var v) {
  if (v.id >= nodes_.size())
    throw ContractViolation("tape variable " + std::to_string(v.id) + " was not recorded");
  return nodes_[v.id];
}

const Matrix& Tape::value(Var v) const {
  const Node& n = node(v);
  return n.ref ? *n.ref : n.value;
}

const Matrix& Tape::grad(Var v) const {
  const Node& n = node(v);
  if (n.grad.size() == 0) throw ContractViolation("no gradient recorded for this variable");
  return n.grad;
}

void Tape::accumulate(Var v, const Matrix& g) {
  Node& n = node(v);
  if (!n.requires_grad) return;
  n.grad += g;
}

std::size_t Tape::backward(Var loss, double loss_grad) {
  if (nodes_.empty()) throw ContractViolation("backward called before any forward pass");
  const Node& out = node(loss);
  const Matrix& lv = out.ref ? *out.ref : out.value;
  if (lv.rows() != 1 || lv.cols() != 1) throw ContractViolation("backward requires a scalar loss");

  for (auto& n : nodes_) {
    if (!n.requires_grad) continue;
    const Matrix& v = n.ref ? *n.ref : n.value;
    n.grad = Matrix::Zero(v.rows(), v.cols());
  }
  visit_order_.clear();
  if (!out.requires_grad) return 0;
  nodes_[loss.id].grad(0, 0) = loss_grad;

  std::size_t visited = 0;
  for (std::size_t i = loss.id + 1; i-- > 0;) {
    Node& n = nodes_[i];
    if (!n.requires_grad) continue;
    if (n.param) {
      n.param->grad += n.grad;
    } else if (n.backward) {
      // The closure may write into earlier nodes only, so this reference stays valid.
      n.backward(*this, n.grad);
      visit_order_.push_back(i);
      ++visited;
    }
  }
  return visited;
}

void Tape::clear() {
  nodes_.clear();
  visit_order_.clear();
}

}  // namespace highway_rl::numkit
