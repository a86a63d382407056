#include "highway_rl/numkit/ops.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "highway_rl/errors.hpp"

namespace highway_rl::numkit {

namespace {

std::string dims(const Matrix& m) {
  return std::to_string(m.rows()) + "x" + std::to_string(m.cols());
}

void require(bool ok, const char* op, const Matrix& a, const Matrix& b) {
  if (!ok)
    throw ConfigError(std::string(op) + ": dimension mismatch (" + dims(a) + " vs " + dims(b) + ")");
}

bool is_row_broadcast(const Matrix& a, const Matrix& b) {
  return b.rows() == 1 && b.cols() == a.cols();
}

}  // namespace

Var affine(Tape& t, Var x, Var w, Var b) {
  const Matrix& xv = t.value(x);
  const Matrix& wv = t.value(w);
  const Matrix& bv = t.value(b);
  require(xv.cols() == wv.cols(), "affine", xv, wv);
  require(bv.rows() == 1 && bv.cols() == wv.rows(), "affine", wv, bv);
  Matrix out = xv * wv.transpose();
  out.rowwise() += bv.row(0);
  return t.record(std::move(out), {x, w, b}, [x, w, b](Tape& tp, const Matrix& g) {
    if (tp.requires_grad(x)) tp.accumulate(x, g * tp.value(w));
    if (tp.requires_grad(w)) tp.accumulate(w, g.transpose() * tp.value(x));
    if (tp.requires_grad(b)) tp.accumulate(b, g.colwise().sum());
  });
}

Var linear(Tape& t, Var x, Var w) {
  const Matrix& xv = t.value(x);
  const Matrix& wv = t.value(w);
  require(xv.cols() == wv.cols(), "linear", xv, wv);
  Matrix out = xv * wv.transpose();
  return t.record(std::move(out), {x, w}, [x, w](Tape& tp, const Matrix& g) {
    if (tp.requires_grad(x)) tp.accumulate(x, g * tp.value(w));
    if (tp.requires_grad(w)) tp.accumulate(w, g.transpose() * tp.value(x));
  });
}

Var add(Tape& t, Var a, Var b) {
  const Matrix& av = t.value(a);
  const Matrix& bv = t.value(b);
  if (av.rows() == bv.rows() && av.cols() == bv.cols()) {
    return t.record(av + bv, {a, b}, [a, b](Tape& tp, const Matrix& g) {
      tp.accumulate(a, g);
      tp.accumulate(b, g);
    });
  }
  require(is_row_broadcast(av, bv), "add", av, bv);
  Matrix out = av;
  out.rowwise() += bv.row(0);
  return t.record(std::move(out), {a, b}, [a, b](Tape& tp, const Matrix& g) {
    tp.accumulate(a, g);
    if (tp.requires_grad(b)) tp.accumulate(b, g.colwise().sum());
  });
}

Var sub(Tape& t, Var a, Var b) {
  const Matrix& av = t.value(a);
  const Matrix& bv = t.value(b);
  require(av.rows() == bv.rows() && av.cols() == bv.cols(), "sub", av, bv);
  return t.record(av - bv, {a, b}, [a, b](Tape& tp, const Matrix& g) {
    tp.accumulate(a, g);
    if (tp.requires_grad(b)) tp.accumulate(b, -g);
  });
}

Var mul(Tape& t, Var a, Var b) {
  const Matrix& av = t.value(a);
  const Matrix& bv = t.value(b);
  require(av.rows() == bv.rows() && av.cols() == bv.cols(), "mul", av, bv);
  return t.record(av.cwiseProduct(bv), {a, b}, [a, b](Tape& tp, const Matrix& g) {
    if (tp.requires_grad(a)) tp.accumulate(a, g.cwiseProduct(tp.value(b)));
    if (tp.requires_grad(b)) tp.accumulate(b, g.cwiseProduct(tp.value(a)));
  });
}

Var scale(Tape& t, Var a, double s) {
  return t.record(t.value(a) * s, {a}, [a, s](Tape& tp, const Matrix& g) { tp.accumulate(a, g * s); });
}

Var tanh(Tape& t, Var a) {
  Matrix out = t.value(a).array().tanh().matrix();
  const std::size_t self = t.size();
  return t.record(std::move(out), {a}, [a, self](Tape& tp, const Matrix& g) {
    const Matrix& y = tp.value(Var{self});
    tp.accumulate(a, (g.array() * (1.0 - y.array().square())).matrix());
  });
}

Var relu(Tape& t, Var a) {
  Matrix out = t.value(a).cwiseMax(0.0);
  return t.record(std::move(out), {a}, [a](Tape& tp, const Matrix& g) {
    const Matrix& x = tp.value(a);
    tp.accumulate(a, (x.array() > 0.0).select(g, 0.0).matrix());
  });
}

Var exp(Tape& t, Var a) {
  Matrix out = t.value(a).array().exp().matrix();
  const std::size_t self = t.size();
  return t.record(std::move(out), {a}, [a, self](Tape& tp, const Matrix& g) {
    tp.accumulate(a, g.cwiseProduct(tp.value(Var{self})));
  });
}

Var sum(Tape& t, Var a) {
  Matrix out(1, 1);
  out(0, 0) = t.value(a).sum();
  return t.record(std::move(out), {a}, [a](Tape& tp, const Matrix& g) {
    const Matrix& x = tp.value(a);
    tp.accumulate(a, Matrix::Constant(x.rows(), x.cols(), g(0, 0)));
  });
}

Var mean(Tape& t, Var a) {
  const auto n = static_cast<double>(t.value(a).size());
  if (n == 0) throw ContractViolation("mean of an empty tensor");
  return scale(t, sum(t, a), 1.0 / n);
}

Var softmax_rows(Tape& t, Var a) {
  const Matrix& x = t.value(a);
  Matrix out(x.rows(), x.cols());
  for (Eigen::Index r = 0; r < x.rows(); ++r) {
    const double m = x.row(r).maxCoeff();
    out.row(r) = (x.row(r).array() - m).exp().matrix();
    out.row(r) /= out.row(r).sum();
  }
  const std::size_t self = t.size();
  return t.record(std::move(out), {a}, [a, self](Tape& tp, const Matrix& g) {
    const Matrix& y = tp.value(Var{self});
    Matrix dx(y.rows(), y.cols());
    for (Eigen::Index r = 0; r < y.rows(); ++r) {
      const double dot = g.row(r).dot(y.row(r));
      dx.row(r) = (y.row(r).array() * (g.row(r).array() - dot)).matrix();
    }
    tp.accumulate(a, dx);
  });
}

Var log_sum_exp_rows(Tape& t, Var a) {
  const Matrix& x = t.value(a);
  Matrix out(x.rows(), 1);
  for (Eigen::Index r = 0; r < x.rows(); ++r) {
    const double m = x.row(r).maxCoeff();
    out(r, 0) = m + std::log((x.row(r).array() - m).exp().sum());
  }
  const std::size_t self = t.size();
  return t.record(std::move(out), {a}, [a, self](Tape& tp, const Matrix& g) {
    const Matrix& x = tp.value(a);
    const Matrix& y = tp.value(Var{self});
    Matrix dx(x.rows(), x.cols());
    for (Eigen::Index r = 0; r < x.rows(); ++r)
      dx.row(r) = ((x.row(r).array() - y(r, 0)).exp() * g(r, 0)).matrix();
    tp.accumulate(a, dx);
  });
}

Var recurrent_step(Tape& t, Var input, Var hidden, Var w_ih, Var w_hh, Var b) {
  const Matrix& hv = t.value(hidden);
  const Matrix& whh = t.value(w_hh);
  if (whh.rows() != whh.cols() || hv.cols() != whh.cols())
    throw ConfigError("recurrent_step: hidden size " + std::to_string(hv.cols()) +
                      " does not match W_hh " + dims(whh));
  if (t.value(input).rows() != hv.rows())
    throw ConfigError("recurrent_step: input and hidden batch sizes differ");
  return tanh(t, add(t, affine(t, input, w_ih, b), linear(t, hidden, w_hh)));
}

std::vector<double> softmax(std::span<const double> logits) {
  std::vector<double> out(logits.size());
  if (logits.empty()) return out;
  const double m = *std::max_element(logits.begin(), logits.end());
  double z = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    out[i] = std::exp(logits[i] - m);
    z += out[i];
  }
  for (double& v : out) v /= z;
  return out;
}

double log_sum_exp(std::span<const double> terms) {
  if (terms.empty()) throw ContractViolation("log_sum_exp of an empty sequence");
  if (terms.size() == 1) return terms[0];
  const double m = *std::max_element(terms.begin(), terms.end());
  if (m == -std::numeric_limits<double>::infinity()) return m;
  double s = 0.0;
  for (double v : terms) s += std::exp(v - m);
  return m + std::log(s);
}

}  // namespace highway_rl::numkit
