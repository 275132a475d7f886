#pragma once

#include "common/rng.hpp"
#include "envs/tabular_mdp.hpp"
#include "spg/policy.hpp"

#include <Eigen/Dense>

#include <vector>

namespace pgvlab::variance {

using Eigen::MatrixXd;
using Eigen::VectorXd;

/// Every expectation needed by the variance formulas, by exact enumeration over
/// the stationary distribution, the policy and the t-step kernels. Parameters
/// are the S*A entries of a softmax logit table (row-major), so
/// grad log pi(a|s) = e_{s,a} - pi(s,.) restricted to row s.
///
/// Lag-t terms carry w^t, where w is the per-step weight discount of the
/// estimator (w = 1 is the undiscounted stationary case).
struct Moments {
  int n_states = 0;
  int n_actions = 0;
  int max_lag = 0;
  double weight_discount = 1.0;

  VectorXd stationary;             // S
  MatrixXd policy;                 // S x A
  MatrixXd q;                      // S x A
  std::vector<MatrixXd> upsilon;   // per state: A x P, Q(s,a) grad log pi(a|s)
  MatrixXd upsilon_bar;            // S x P, policy average of upsilon
  VectorXd grad_j;                 // P, E_s[upsilon_bar]
  VectorXd var_s;                  // P, Var_s[upsilon_bar]
  VectorXd evar_a;                 // P, E_s Var_a[upsilon]
  /// Indexed by lag t = 0..max_lag (entry 0 is unused and zero).
  std::vector<VectorXd> alpha_e;   // Cov[upsilon_bar_0, upsilon_bar_t]
  std::vector<VectorXd> e_alpha;   // policy-dependent lag-t covariance

  int parameter_count() const { return n_states * n_actions; }
  /// Cov[Y_0, Y_t] for the N-action average Y.
  VectorXd lag_covariance(int t, int n_actions_per_state) const;
  /// Cov[upsilon_0, upsilon_t], the single-action lag covariance.
  VectorXd single_action_covariance(int t) const { return lag_covariance(t, 1); }
};

/// Exact moments for lags 1..max_lag. NumericError when the chain's stationary
/// distribution cannot be found.
Moments exact_moments(const envs::TabularMDP& mdp, const MatrixXd& logits, int max_lag,
                      double weight_discount = 1.0);

/// Exact variance of the N-action, T-step estimator started from the
/// stationary distribution, computed by a forward recursion over the joint law
/// of (state, running sum). Independent of the lag decomposition. Returns the
/// per-parameter variance of the estimator (not scaled by T).
VectorXd exact_estimator_variance(const envs::TabularMDP& mdp, const MatrixXd& logits, int T, int n_actions,
                                  double weight_discount = 1.0);

/// Softmax-of-table spg::Policy carrying `logits`.
spg::Policy tabular_policy(const MatrixXd& logits);

/// Per-parameter mean, the scalar reduction used for reporting.
inline double param_mean(const VectorXd& v) { return v.size() == 0 ? 0.0 : v.mean(); }

/// Draws `count` independent T-step N-action estimates with exact Q-values from
/// a stationary start, through spg::estimate_spg. Rows are estimates.
MatrixXd sample_estimates(const envs::TabularMDP& mdp, const MatrixXd& logits, int T, int n_actions, int count,
                          Rng& rng, double weight_discount = 1.0);

}  // namespace pgvlab::variance
