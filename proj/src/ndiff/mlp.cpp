#include "ndiff/mlp.hpp"

#include "common/error.hpp"

#include <cmath>

namespace pgvlab::ndiff {

void MlpSpec::validate() const {
  require_shape(input_dim >= 1 && output_dim >= 1, "MlpSpec: input and output dims must be >= 1");
  for (int h : hidden_sizes) require_shape(h >= 1, "MlpSpec: hidden sizes must be >= 1");
}

std::size_t MlpSpec::parameter_count() const {
  std::size_t total = 0;
  int in = input_dim;
  for (std::size_t l = 0; l < layer_count(); ++l) {
    const int out = l < hidden_sizes.size() ? hidden_sizes[l] : output_dim;
    total += static_cast<std::size_t>(in) * static_cast<std::size_t>(out) + (bias ? static_cast<std::size_t>(out) : 0);
    in = out;
  }
  return total;
}

Mlp::Mlp(MlpSpec spec, ParamVector& params, const std::string& prefix) : spec_(std::move(spec)) {
  spec_.validate();
  first_segment_ = params.layout().size();
  int in = spec_.input_dim;
  for (std::size_t l = 0; l < spec_.layer_count(); ++l) {
    const int out = l < spec_.hidden_sizes.size() ? spec_.hidden_sizes[l] : spec_.output_dim;
    const std::string name = prefix + "l" + std::to_string(l);
    params.add_segment(name + ".w", in, out);
    if (spec_.bias) params.add_segment(name + ".b", 1, out);
    in = out;
  }
}

std::size_t Mlp::weight_segment(std::size_t layer) const {
  return first_segment_ + layer * (spec_.bias ? 2 : 1);
}

std::size_t Mlp::bias_segment(std::size_t layer) const { return weight_segment(layer) + 1; }

void Mlp::init_orthogonal(ParamVector& params, Rng& rng, double output_gain) const {
  for (std::size_t l = 0; l < spec_.layer_count(); ++l) {
    auto w = params.matrix(weight_segment(l));
    const double gain = (l + 1 == spec_.layer_count()) ? output_gain : std::sqrt(2.0);
    const Eigen::Index big = std::max(w.rows(), w.cols());
    const Eigen::Index small = std::min(w.rows(), w.cols());
    Eigen::MatrixXd g(big, small);
    for (Eigen::Index i = 0; i < big; ++i)
      for (Eigen::Index j = 0; j < small; ++j) g(i, j) = rng.normal();
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
    Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(big, small);
    // Sign fix makes the draw uniform over the orthogonal group.
    const Eigen::MatrixXd r = qr.matrixQR();
    for (Eigen::Index j = 0; j < small; ++j) {
      if (r(j, j) < 0.0) q.col(j) *= -1.0;
    }
    if (w.rows() >= w.cols()) {
      w = gain * q;
    } else {
      w = gain * q.transpose();
    }
    if (spec_.bias) params.matrix(bias_segment(l)).setZero();
  }
}

Matrix Mlp::forward(const ParamVector& params, const Matrix& input) const {
  require_shape(input.cols() == spec_.input_dim, "Mlp::forward: expected " + std::to_string(spec_.input_dim) +
                                                    " input columns, got " + std::to_string(input.cols()));
  Matrix h = input;
  for (std::size_t l = 0; l < spec_.layer_count(); ++l) {
    Matrix z = h * params.matrix(weight_segment(l));
    if (spec_.bias) z.rowwise() += params.matrix(bias_segment(l)).row(0);
    if (l + 1 < spec_.layer_count()) {
      if (spec_.activation == Activation::tanh) {
        z = z.array().tanh().matrix();
      } else {
        z = z.cwiseMax(0.0);
      }
    }
    h = std::move(z);
  }
  return h;
}

Var Mlp::forward(Tape& tape, const ParamVector& params, Var input) const {
  require_shape(tape.value(input).cols() == spec_.input_dim, "Mlp::forward: input width mismatch");
  Var h = input;
  for (std::size_t l = 0; l < spec_.layer_count(); ++l) {
    Var z = matmul(h, tape.param(params, weight_segment(l)));
    if (spec_.bias) z = add(z, tape.param(params, bias_segment(l)));
    if (l + 1 < spec_.layer_count()) {
      z = spec_.activation == Activation::tanh ? tanh(z) : relu(z);
    }
    h = z;
  }
  return h;
}

ParamVector make_params(const MlpSpec& spec) {
  ParamVector params;
  Mlp net(spec, params);
  return params;
}

std::vector<double> forward(const MlpSpec& spec, const ParamVector& params, std::span<const double> input) {
  ParamVector layout;
  const Mlp net(spec, layout);
  require_shape(layout.same_layout(params), "forward: parameter layout does not match MlpSpec");
  require_shape(static_cast<int>(input.size()) == spec.input_dim, "forward: input length must equal input_dim");
  Matrix x(1, spec.input_dim);
  for (int i = 0; i < spec.input_dim; ++i) x(0, i) = input[static_cast<std::size_t>(i)];
  const Matrix y = net.forward(params, x);
  return {y.data(), y.data() + y.size()};
}

}  // namespace pgvlab::ndiff
