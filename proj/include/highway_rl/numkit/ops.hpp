#pragma once

#include <span>

#include "highway_rl/numkit/tape.hpp"

namespace highway_rl::numkit {

// Batched ops: rows are samples, columns are features. A bias or any other
// 1 x n operand broadcasts over rows where noted.

/// x (B x in), W (out x in), b (1 x out) -> x W^T + b.
Var affine(Tape& t, Var x, Var w, Var b);
/// x W^T without bias.
Var linear(Tape& t, Var x, Var w);
/// Elementwise sum; `b` may be a 1 x cols row broadcast over a's rows.
Var add(Tape& t, Var a, Var b);
Var sub(Tape& t, Var a, Var b);
/// Elementwise (Hadamard) product of equally shaped operands.
Var mul(Tape& t, Var a, Var b);
Var scale(Tape& t, Var a, double s);
Var tanh(Tape& t, Var a);
Var relu(Tape& t, Var a);
Var exp(Tape& t, Var a);
/// Sum of all entries -> 1 x 1.
Var sum(Tape& t, Var a);
Var mean(Tape& t, Var a);
/// Row-wise softmax.
Var softmax_rows(Tape& t, Var a);
/// Row-wise log-sum-exp -> B x 1.
Var log_sum_exp_rows(Tape& t, Var a);

/// tanh(x W_ih^T + h W_hh^T + b)
Var recurrent_step(Tape& t, Var input, Var hidden, Var w_ih, Var w_hh, Var b);

// Plain (untaped) helpers.

/// Max-shifted softmax. Requires finite input.
std::vector<double> softmax(std::span<const double> logits);
/// ln sum exp(terms) with max subtraction; throws ContractViolation on empty input.
double log_sum_exp(std::span<const double> terms);

}  // namespace highway_rl::numkit
