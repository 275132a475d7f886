#include "ndiff/tape.hpp"

#include "common/error.hpp"

#include <cmath>
#include <string>

namespace pgvlab::ndiff {

namespace {

enum class Broadcast { none, scalar, row, col };

Broadcast broadcast_kind(const Matrix& a, const Matrix& b, const char* op) {
  if (a.rows() == b.rows() && a.cols() == b.cols()) return Broadcast::none;
  if (b.rows() == 1 && b.cols() == 1) return Broadcast::scalar;
  if (b.rows() == 1 && b.cols() == a.cols()) return Broadcast::row;
  if (b.cols() == 1 && b.rows() == a.rows()) return Broadcast::col;
  throw ShapeError(std::string(op) + ": cannot broadcast " + std::to_string(b.rows()) + "x" +
                   std::to_string(b.cols()) + " onto " + std::to_string(a.rows()) + "x" +
                   std::to_string(a.cols()));
}

// Expands b to a's shape.
Matrix expand(const Matrix& a, const Matrix& b, Broadcast kind) {
  switch (kind) {
    case Broadcast::none:
      return b;
    case Broadcast::scalar:
      return Matrix::Constant(a.rows(), a.cols(), b(0, 0));
    case Broadcast::row:
      return b.replicate(a.rows(), 1);
    case Broadcast::col:
      return b.replicate(1, a.cols());
  }
  return b;
}

Tape* same_tape(Var a, Var b) {
  if (a.tape == nullptr || a.tape != b.tape) throw ContractError("operands recorded on different tapes");
  return a.tape;
}

}  // namespace

Var Tape::record(Op op, Matrix value, int a, int b, double s0, double s1, std::vector<int> indices) {
  Node n;
  n.op = op;
  n.value = std::move(value);
  n.a = a;
  n.b = b;
  n.s0 = s0;
  n.s1 = s1;
  n.indices = std::move(indices);
  nodes_.push_back(std::move(n));
  return Var{this, static_cast<int>(nodes_.size() - 1)};
}

Var Tape::constant(Matrix value) { return record(Op::constant, std::move(value)); }

Var Tape::constant_row(std::span<const double> values) {
  Matrix m(1, static_cast<Eigen::Index>(values.size()));
  for (std::size_t i = 0; i < values.size(); ++i) m(0, static_cast<Eigen::Index>(i)) = values[i];
  return constant(std::move(m));
}

Var Tape::param(const ParamVector& params, std::size_t segment) {
  Var v = record(Op::param, Matrix(params.matrix(segment)));
  nodes_.back().params = &params;
  nodes_.back().segment = segment;
  return v;
}

double Tape::scalar(Var v) const {
  const Matrix& m = value(v);
  require_shape(m.rows() == 1 && m.cols() == 1, "scalar(): node is not 1x1");
  return m(0, 0);
}

void Tape::accumulate(int id, const Matrix& g) {
  Node& n = nodes_[static_cast<std::size_t>(id)];
  if (n.grad.size() == 0) {
    n.grad = g;
  } else {
    n.grad += g;
  }
}

void Tape::accumulate_broadcast(int id, const Matrix& g) {
  const Matrix& target = nodes_[static_cast<std::size_t>(id)].value;
  if (target.rows() == g.rows() && target.cols() == g.cols()) {
    accumulate(id, g);
  } else if (target.rows() == 1 && target.cols() == 1) {
    accumulate(id, Matrix::Constant(1, 1, g.sum()));
  } else if (target.rows() == 1) {
    accumulate(id, g.colwise().sum());
  } else {
    accumulate(id, g.rowwise().sum());
  }
}

void Tape::backward(Var root) {
  require(root.tape == this, "backward: root belongs to another tape");
  const Matrix& rv = value(root);
  if (rv.rows() != 1 || rv.cols() != 1) {
    throw ContractError("backward: root must be a scalar (1x1), got " + std::to_string(rv.rows()) +
                        "x" + std::to_string(rv.cols()));
  }
  for (auto& n : nodes_) n.grad.resize(0, 0);
  nodes_[static_cast<std::size_t>(root.id)].grad = Matrix::Ones(1, 1);
  for (int id = root.id; id >= 0; --id) {
    const Node& n = nodes_[static_cast<std::size_t>(id)];
    if (n.grad.size() == 0) continue;
    propagate(n);
  }
}

void Tape::propagate(const Node& n) {
  const Matrix& g = n.grad;
  switch (n.op) {
    case Op::constant:
    case Op::param:
      break;
    case Op::matmul: {
      const Matrix& a = nodes_[n.a].value;
      const Matrix& b = nodes_[n.b].value;
      accumulate(n.a, g * b.transpose());
      accumulate(n.b, a.transpose() * g);
      break;
    }
    case Op::add:
      accumulate(n.a, g);
      accumulate_broadcast(n.b, g);
      break;
    case Op::sub:
      accumulate(n.a, g);
      accumulate_broadcast(n.b, -g);
      break;
    case Op::mul: {
      const Matrix& a = nodes_[n.a].value;
      const Matrix& b = nodes_[n.b].value;
      const Broadcast kind = broadcast_kind(a, b, "mul");
      const Matrix bx = expand(a, b, kind);
      accumulate(n.a, g.cwiseProduct(bx));
      accumulate_broadcast(n.b, g.cwiseProduct(a));
      break;
    }
    case Op::scale:
      accumulate(n.a, n.s0 * g);
      break;
    case Op::add_scalar:
      accumulate(n.a, g);
      break;
    case Op::tanh:
      accumulate(n.a, g.cwiseProduct((1.0 - n.value.array().square()).matrix()));
      break;
    case Op::relu: {
      const Matrix& a = nodes_[n.a].value;
      accumulate(n.a, (a.array() > 0.0).select(g.array(), 0.0).matrix());
      break;
    }
    case Op::exp:
      accumulate(n.a, g.cwiseProduct(n.value));
      break;
    case Op::log:
      accumulate(n.a, g.cwiseQuotient(nodes_[n.a].value));
      break;
    case Op::square:
      accumulate(n.a, 2.0 * g.cwiseProduct(nodes_[n.a].value));
      break;
    case Op::sum: {
      const Matrix& a = nodes_[n.a].value;
      accumulate(n.a, Matrix::Constant(a.rows(), a.cols(), g(0, 0)));
      break;
    }
    case Op::mean: {
      const Matrix& a = nodes_[n.a].value;
      accumulate(n.a, Matrix::Constant(a.rows(), a.cols(), g(0, 0) / static_cast<double>(a.size())));
      break;
    }
    case Op::row_sum: {
      const Matrix& a = nodes_[n.a].value;
      accumulate(n.a, g.replicate(1, a.cols()));
      break;
    }
    case Op::log_softmax: {
      // d/dx_j log_softmax(x)_i = delta_ij - softmax_j
      const Matrix probs = n.value.array().exp().matrix();
      const Matrix gsum = g.rowwise().sum();
      Matrix ga = g - probs.cwiseProduct(gsum.replicate(1, g.cols()));
      accumulate(n.a, ga);
      break;
    }
    case Op::pick: {
      const Matrix& a = nodes_[n.a].value;
      Matrix ga = Matrix::Zero(a.rows(), a.cols());
      for (Eigen::Index r = 0; r < a.rows(); ++r) ga(r, n.indices[static_cast<std::size_t>(r)]) = g(r, 0);
      accumulate(n.a, ga);
      break;
    }
    case Op::clamp: {
      const Matrix& a = nodes_[n.a].value;
      accumulate(n.a, (a.array() > n.s0 && a.array() < n.s1).select(g.array(), 0.0).matrix());
      break;
    }
    case Op::minimum: {
      const Matrix& a = nodes_[n.a].value;
      const Matrix& b = nodes_[n.b].value;
      const auto take_a = (a.array() <= b.array());
      accumulate(n.a, take_a.select(g.array(), 0.0).matrix());
      accumulate(n.b, take_a.select(0.0, g.array()).matrix());
      break;
    }
    case Op::concat_cols: {
      const Eigen::Index ca = nodes_[n.a].value.cols();
      const Eigen::Index cb = nodes_[n.b].value.cols();
      accumulate(n.a, g.leftCols(ca));
      accumulate(n.b, g.rightCols(cb));
      break;
    }
  }
}

ParamVector Tape::gradient(const ParamVector& params) const {
  ParamVector out = params.zeros_like();
  for (const Node& n : nodes_) {
    if (n.op != Op::param || n.params != &params || n.grad.size() == 0) continue;
    out.matrix(n.segment) += n.grad;
  }
  return out;
}

Var matmul(Var a, Var b) {
  Tape* t = same_tape(a, b);
  const Matrix& av = t->value(a);
  const Matrix& bv = t->value(b);
  require_shape(av.cols() == bv.rows(), "matmul: inner dimensions " + std::to_string(av.cols()) +
                                            " and " + std::to_string(bv.rows()) + " differ");
  return t->record(Op::matmul, av * bv, a.id, b.id);
}

Var add(Var a, Var b) {
  Tape* t = same_tape(a, b);
  const Matrix& av = t->value(a);
  const Matrix& bv = t->value(b);
  const Broadcast kind = broadcast_kind(av, bv, "add");
  Matrix out = av + expand(av, bv, kind);
  return t->record(Op::add, std::move(out), a.id, b.id);
}

Var sub(Var a, Var b) {
  Tape* t = same_tape(a, b);
  const Matrix& av = t->value(a);
  const Matrix& bv = t->value(b);
  const Broadcast kind = broadcast_kind(av, bv, "sub");
  Matrix out = av - expand(av, bv, kind);
  return t->record(Op::sub, std::move(out), a.id, b.id);
}

Var mul(Var a, Var b) {
  Tape* t = same_tape(a, b);
  const Matrix& av = t->value(a);
  const Matrix& bv = t->value(b);
  const Broadcast kind = broadcast_kind(av, bv, "mul");
  Matrix out = av.cwiseProduct(expand(av, bv, kind));
  return t->record(Op::mul, std::move(out), a.id, b.id);
}

Var scale(Var a, double c) { return a.tape->record(Op::scale, c * a.tape->value(a), a.id, -1, c); }

Var add_scalar(Var a, double c) {
  return a.tape->record(Op::add_scalar, (a.tape->value(a).array() + c).matrix(), a.id, -1, c);
}

Var tanh(Var a) { return a.tape->record(Op::tanh, a.tape->value(a).array().tanh().matrix(), a.id); }

Var relu(Var a) { return a.tape->record(Op::relu, a.tape->value(a).cwiseMax(0.0), a.id); }

Var exp(Var a) { return a.tape->record(Op::exp, a.tape->value(a).array().exp().matrix(), a.id); }

Var log(Var a) { return a.tape->record(Op::log, a.tape->value(a).array().log().matrix(), a.id); }

Var square(Var a) { return a.tape->record(Op::square, a.tape->value(a).array().square().matrix(), a.id); }

Var sum(Var a) { return a.tape->record(Op::sum, Matrix::Constant(1, 1, a.tape->value(a).sum()), a.id); }

Var mean(Var a) {
  const Matrix& v = a.tape->value(a);
  require_shape(v.size() > 0, "mean of an empty tensor");
  return a.tape->record(Op::mean, Matrix::Constant(1, 1, v.mean()), a.id);
}

Var row_sum(Var a) { return a.tape->record(Op::row_sum, a.tape->value(a).rowwise().sum(), a.id); }

Var log_softmax(Var a) {
  const Matrix& v = a.tape->value(a);
  Matrix out(v.rows(), v.cols());
  for (Eigen::Index r = 0; r < v.rows(); ++r) {
    const double m = v.row(r).maxCoeff();
    const double lse = m + std::log((v.row(r).array() - m).exp().sum());
    out.row(r) = v.row(r).array() - lse;
  }
  return a.tape->record(Op::log_softmax, std::move(out), a.id);
}

Var pick(Var a, std::vector<int> indices) {
  const Matrix& v = a.tape->value(a);
  require_shape(static_cast<Eigen::Index>(indices.size()) == v.rows(), "pick: one index per row required");
  Matrix out(v.rows(), 1);
  for (Eigen::Index r = 0; r < v.rows(); ++r) {
    const int c = indices[static_cast<std::size_t>(r)];
    require_shape(c >= 0 && c < v.cols(), "pick: column index out of range");
    out(r, 0) = v(r, c);
  }
  return a.tape->record(Op::pick, std::move(out), a.id, -1, 0.0, 0.0, std::move(indices));
}

Var clamp(Var a, double lo, double hi) {
  return a.tape->record(Op::clamp, a.tape->value(a).cwiseMax(lo).cwiseMin(hi), a.id, -1, lo, hi);
}

Var minimum(Var a, Var b) {
  Tape* t = same_tape(a, b);
  const Matrix& av = t->value(a);
  const Matrix& bv = t->value(b);
  require_shape(av.rows() == bv.rows() && av.cols() == bv.cols(), "minimum: shapes differ");
  return t->record(Op::minimum, av.cwiseMin(bv), a.id, b.id);
}

Var concat_cols(Var a, Var b) {
  Tape* t = same_tape(a, b);
  const Matrix& av = t->value(a);
  const Matrix& bv = t->value(b);
  require_shape(av.rows() == bv.rows(), "concat_cols: row counts differ");
  Matrix out(av.rows(), av.cols() + bv.cols());
  out << av, bv;
  return t->record(Op::concat_cols, std::move(out), a.id, b.id);
}

}  // namespace pgvlab::ndiff
