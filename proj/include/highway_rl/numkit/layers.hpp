#pragma once

#include <string>

#include "highway_rl/numkit/ops.hpp"

namespace highway_rl::numkit {

/// Fully connected layer whose tensors live in a caller-owned ParamSet.
struct Dense {
  std::size_t weight = 0;
  std::size_t bias = 0;
  std::size_t in = 0;
  std::size_t out = 0;

  static Dense create(ParamSet& ps, const std::string& name, std::size_t in, std::size_t out);

  Var forward(Tape& t, ParamSet& ps, Var x) const;
  Matrix apply(const ParamSet& ps, const Matrix& x) const;
};

/// Vanilla tanh recurrent cell: h' = tanh(W_ih x + W_hh h + b).
struct RecurrentCell {
  std::size_t w_ih = 0;
  std::size_t w_hh = 0;
  std::size_t bias = 0;
  std::size_t in = 0;
  std::size_t hidden = 0;

  static RecurrentCell create(ParamSet& ps, const std::string& name, std::size_t in,
                              std::size_t hidden);

  Var step(Tape& t, ParamSet& ps, Var x, Var h) const;
  Matrix apply(const ParamSet& ps, const Matrix& x, const Matrix& h) const;
};

}  // namespace highway_rl::numkit
