#include "highway_rl/numkit/layers.hpp"

#include "highway_rl/errors.hpp"

namespace highway_rl::numkit {

Dense Dense::create(ParamSet& ps, const std::string& name, std::size_t in, std::size_t out) {
  Dense d;
  d.in = in;
  d.out = out;
  d.weight = ps.add(name + ".weight", {out, in});
  d.bias = ps.add(name + ".bias", {out});
  return d;
}

Var Dense::forward(Tape& t, ParamSet& ps, Var x) const {
  return affine(t, x, t.param(ps[weight]), t.param(ps[bias]));
}

Matrix Dense::apply(const ParamSet& ps, const Matrix& x) const {
  const Matrix& w = ps[weight].value;
  if (x.cols() != w.cols()) throw ConfigError("dense layer: input width mismatch");
  Matrix y = x * w.transpose();
  y.rowwise() += ps[bias].value.row(0);
  return y;
}

RecurrentCell RecurrentCell::create(ParamSet& ps, const std::string& name, std::size_t in,
                                    std::size_t hidden) {
  RecurrentCell c;
  c.in = in;
  c.hidden = hidden;
  c.w_ih = ps.add(name + ".w_ih", {hidden, in});
  c.w_hh = ps.add(name + ".w_hh", {hidden, hidden});
  c.bias = ps.add(name + ".bias", {hidden});
  return c;
}

Var RecurrentCell::step(Tape& t, ParamSet& ps, Var x, Var h) const {
  return recurrent_step(t, x, h, t.param(ps[w_ih]), t.param(ps[w_hh]), t.param(ps[bias]));
}

Matrix RecurrentCell::apply(const ParamSet& ps, const Matrix& x, const Matrix& h) const {
  if (x.cols() != static_cast<Eigen::Index>(in) || h.cols() != static_cast<Eigen::Index>(hidden) ||
      x.rows() != h.rows())
    throw ConfigError("recurrent cell: input or hidden dimension mismatch");
  Matrix pre = x * ps[w_ih].value.transpose() + h * ps[w_hh].value.transpose();
  pre.rowwise() += ps[bias].value.row(0);
  return pre.array().tanh().matrix();
}

}  // namespace highway_rl::numkit
