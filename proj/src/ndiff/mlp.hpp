#pragma once

#include "common/rng.hpp"
#include "ndiff/param_vector.hpp"
#include "ndiff/tape.hpp"

#include <string>
#include <vector>

namespace pgvlab::ndiff {

enum class Activation { tanh, relu };

struct MlpSpec {
  int input_dim = 1;
  std::vector<int> hidden_sizes;
  int output_dim = 1;
  Activation activation = Activation::tanh;
  bool bias = true;

  void validate() const;
  std::size_t parameter_count() const;
  std::size_t layer_count() const { return hidden_sizes.size() + 1; }
};

/// An MLP bound to a contiguous run of segments inside some ParamVector.
/// Layer l owns "<prefix>l<l>.w" (in x out) and, with bias, "<prefix>l<l>.b" (1 x out).
class Mlp {
 public:
  Mlp() = default;
  /// Appends the network's segments to `params`.
  Mlp(MlpSpec spec, ParamVector& params, const std::string& prefix = "");

  const MlpSpec& spec() const { return spec_; }
  std::size_t first_segment() const { return first_segment_; }

  /// Orthogonal weights with gain sqrt(2) (tanh/relu hidden) and `output_gain` on
  /// the last layer; zero biases.
  void init_orthogonal(ParamVector& params, Rng& rng, double output_gain) const;

  /// Batched evaluation without recording: rows of `input` are samples.
  Matrix forward(const ParamVector& params, const Matrix& input) const;
  Var forward(Tape& tape, const ParamVector& params, Var input) const;

 private:
  std::size_t weight_segment(std::size_t layer) const;
  std::size_t bias_segment(std::size_t layer) const;

  MlpSpec spec_;
  std::size_t first_segment_ = 0;
};

/// Fresh parameter vector laid out for `spec` (all zeros).
ParamVector make_params(const MlpSpec& spec);

/// Single-sample forward pass over params laid out by make_params(spec).
std::vector<double> forward(const MlpSpec& spec, const ParamVector& params, std::span<const double> input);

}  // namespace pgvlab::ndiff
