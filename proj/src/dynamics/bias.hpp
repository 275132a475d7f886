#pragma once

#include <Eigen/Dense>

namespace pgvlab::dynamics {

/// Inputs of the per-parameter bias formulas for one (s, a) pair.
struct BiasBound {
  Eigen::VectorXd f_s;        // grad log pi(a | s)
  double q_true = 0.0;        // Q(s, a)
  double q_hat = 0.0;         // approximate Q
  double lipschitz_k = 0.0;   // Lipschitz constant of f_s in the state
  double state_error = 0.0;   // |s - s*|
};

struct BiasBoundResult {
  Eigen::VectorXd ma_bias;         // f_s (Q - Q_hat)
  Eigen::VectorXd ms_bias_upper;   // ma_bias + sqrt((K err)^2 + f_s^2 (Q^2 - Q))
  Eigen::VectorXd ms_bias_lower;   // ma_bias - sqrt(...)
  /// Entries whose radicand was negative; their bounds collapse to ma_bias.
  Eigen::Array<bool, Eigen::Dynamic, 1> excluded;
  int excluded_count = 0;
};

/// ContractError when K or the state error is negative or not finite.
BiasBoundResult bias_bounds(const BiasBound& b);

}  // namespace pgvlab::dynamics
