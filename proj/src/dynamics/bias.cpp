#include "dynamics/bias.hpp"

#include "common/error.hpp"

#include <cmath>

namespace pgvlab::dynamics {

BiasBoundResult bias_bounds(const BiasBound& b) {
  require(std::isfinite(b.lipschitz_k) && b.lipschitz_k >= 0.0, "bias_bounds: Lipschitz constant must be finite and >= 0");
  require(std::isfinite(b.state_error) && b.state_error >= 0.0, "bias_bounds: state error must be finite and >= 0");
  require(b.f_s.allFinite() && std::isfinite(b.q_true) && std::isfinite(b.q_hat), "bias_bounds: non-finite input");
  const Eigen::Index P = b.f_s.size();
  BiasBoundResult r;
  r.ma_bias = b.f_s * (b.q_true - b.q_hat);
  r.ms_bias_upper.resize(P);
  r.ms_bias_lower.resize(P);
  r.excluded.resize(P);
  const double ke = b.lipschitz_k * b.state_error;
  const double qq = b.q_true * b.q_true - b.q_true;
  for (Eigen::Index p = 0; p < P; ++p) {
    const double radicand = ke * ke + b.f_s(p) * b.f_s(p) * qq;
    const bool bad = radicand < 0.0;
    const double root = bad ? 0.0 : std::sqrt(radicand);
    r.excluded(p) = bad;
    r.excluded_count += bad ? 1 : 0;
    r.ms_bias_upper(p) = r.ma_bias(p) + root;
    r.ms_bias_lower(p) = r.ma_bias(p) - root;
  }
  return r;
}

}  // namespace pgvlab::dynamics
