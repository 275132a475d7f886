#include "ndiff/adam.hpp"

#include "common/error.hpp"

#include <cmath>

namespace pgvlab::ndiff {

void adam_step(ParamVector& params, const ParamVector& grad, AdamState& state, const AdamConfig& config) {
  require_shape(params.same_layout(grad), "adam_step: gradient layout differs from parameters");
  if (!grad.all_finite()) throw NumericError("adam_step: non-finite gradient");
  const std::size_t n = params.size();
  if (state.m.empty()) {
    state.m.assign(n, 0.0);
    state.v.assign(n, 0.0);
  }
  require_shape(state.m.size() == n && state.v.size() == n, "adam_step: moment buffers have wrong size");

  state.step += 1;
  const double t = static_cast<double>(state.step);
  const double bc1 = 1.0 - std::pow(config.beta1, t);
  const double bc2 = 1.0 - std::pow(config.beta2, t);
  const double step_size = config.lr / bc1;
  const double sqrt_bc2 = std::sqrt(bc2);
  auto values = params.values();
  const auto g = grad.values();
  for (std::size_t i = 0; i < n; ++i) {
    state.m[i] = config.beta1 * state.m[i] + (1.0 - config.beta1) * g[i];
    state.v[i] = config.beta2 * state.v[i] + (1.0 - config.beta2) * g[i] * g[i];
    values[i] -= step_size * state.m[i] / (std::sqrt(state.v[i]) / sqrt_bc2 + config.eps);
  }
}

double clip_global_norm(std::span<ParamVector* const> grads, double max_norm) {
  double sq = 0.0;
  for (const ParamVector* g : grads) sq += g->squared_norm();
  const double norm = std::sqrt(sq);
  if (norm > max_norm && norm > 0.0) {
    const double s = max_norm / (norm + 1e-6);
    for (ParamVector* g : grads) {
      for (double& v : g->values()) v *= s;
    }
  }
  return norm;
}

}  // namespace pgvlab::ndiff
