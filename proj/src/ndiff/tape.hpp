#pragma once

#include "ndiff/param_vector.hpp"

#include <cstdint>
#include <vector>

namespace pgvlab::ndiff {

class Tape;

/// Handle to a node recorded on a Tape. Cheap to copy; valid while the tape lives.
struct Var {
  Tape* tape = nullptr;
  int id = -1;
};

enum class Op : std::uint8_t {
  constant,
  param,
  matmul,
  add,
  sub,
  mul,
  scale,
  add_scalar,
  tanh,
  relu,
  exp,
  log,
  square,
  sum,
  mean,
  row_sum,
  log_softmax,
  pick,
  clamp,
  minimum,
  concat_cols,
};

/// Ordered record of primitive operations with cached outputs. Replaying it in
/// reverse accumulates gradients into every leaf; leaves created through
/// param() map back onto their ParamVector segment.
class Tape {
 public:
  Tape() { nodes_.reserve(64); }

  Var constant(Matrix value);
  Var constant_row(std::span<const double> values);
  Var param(const ParamVector& params, std::size_t segment);

  const Matrix& value(Var v) const { return nodes_.at(v.id).value; }
  double scalar(Var v) const;
  const Matrix& grad(Var v) const { return nodes_.at(v.id).grad; }

  /// Seeds d(root)/d(root) = 1 and propagates. The root must be 1x1.
  void backward(Var root);

  /// Gradient with the layout of `params`, summed over all leaves bound to it.
  /// Segments never touched by the computation come back as zero.
  ParamVector gradient(const ParamVector& params) const;

  std::size_t size() const { return nodes_.size(); }
  void clear() { nodes_.clear(); }

  // Recording entry point for the free-function operators below.
  Var record(Op op, Matrix value, int a = -1, int b = -1, double s0 = 0.0, double s1 = 0.0,
             std::vector<int> indices = {});

 private:
  struct Node {
    Op op = Op::constant;
    Matrix value;
    Matrix grad;
    int a = -1;
    int b = -1;
    double s0 = 0.0;
    double s1 = 0.0;
    std::vector<int> indices;
    const ParamVector* params = nullptr;
    std::size_t segment = 0;
  };

  void accumulate(int id, const Matrix& g);
  void accumulate_broadcast(int id, const Matrix& g);
  void propagate(const Node& n);

  std::vector<Node> nodes_;
};

Var matmul(Var a, Var b);
// Binary elementwise ops broadcast `b` when it is 1x1, 1xC or Rx1.
Var add(Var a, Var b);
Var sub(Var a, Var b);
Var mul(Var a, Var b);
Var scale(Var a, double c);
Var add_scalar(Var a, double c);
Var tanh(Var a);
Var relu(Var a);
Var exp(Var a);
Var log(Var a);
Var square(Var a);
Var sum(Var a);
Var mean(Var a);
Var row_sum(Var a);
Var log_softmax(Var a);
/// Selects column indices[r] of row r; result is Rx1.
Var pick(Var a, std::vector<int> indices);
/// Gradient passes only where lo < a < hi.
Var clamp(Var a, double lo, double hi);
Var minimum(Var a, Var b);
Var concat_cols(Var a, Var b);

inline Var operator+(Var a, Var b) { return add(a, b); }
inline Var operator-(Var a, Var b) { return sub(a, b); }
inline Var operator*(Var a, Var b) { return mul(a, b); }
inline Var operator*(double c, Var a) { return scale(a, c); }
inline Var operator-(Var a) { return scale(a, -1.0); }

}  // namespace pgvlab::ndiff
