#pragma once

#include "ndiff/param_vector.hpp"

#include <cstdint>
#include <vector>

namespace pgvlab::ndiff {

struct AdamConfig {
  double lr = 3e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-5;
};

struct AdamState {
  std::vector<double> m;
  std::vector<double> v;
  std::int64_t step = 0;
};

/// One bias-corrected Adam update. A non-finite gradient raises NumericError
/// before anything (params, moments, step counter) is modified.
void adam_step(ParamVector& params, const ParamVector& grad, AdamState& state, const AdamConfig& config);

/// Scales the gradients jointly so their global L2 norm is at most `max_norm`.
/// Returns the norm before clipping.
double clip_global_norm(std::span<ParamVector* const> grads, double max_norm);

}  // namespace pgvlab::ndiff
