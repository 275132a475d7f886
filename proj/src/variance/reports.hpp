#pragma once

#include "variance/moments.hpp"

#include <optional>

namespace pgvlab::variance {

/// Decomposed variance of the N-action, T-step estimator.
///   T V = [Var_s Ybar + 2 sum_t (T-t)/T alpha_e^t]              (marginalized)
///       + (1/N) [E_s Var_a Y + 2 sum_t (T-t)/T E alpha^t]        (policy-dependent)
struct VarianceReport {
  int T = 0;
  int N = 0;
  VectorXd total;             // V, the per-parameter variance of the estimator
  VectorXd marginalized;      // first bracket (scaled by T)
  VectorXd policy_dependent;  // second bracket including 1/N (scaled by T)
  std::vector<double> cov_trace;      // mean over parameters of Cov[Y, Y^t] (N = 1), t = 1..T-1
  std::vector<double> cov_bar_trace;  // mean over parameters of Cov[Ybar, Ybar^t]

  double total_mean() const { return param_mean(total); }
  double marginalized_mean() const { return param_mean(marginalized); }
  double policy_dependent_mean() const { return param_mean(policy_dependent); }
};

VarianceReport clt_variance(const Moments& m, int T, int N);

struct DeltaReport {
  int T = 0;
  int N = 0;
  double delta = 1.0;
  double alpha_n = 0.0;  // -1 / (T (N^2 + N))
  double alpha_t = 0.0;  // -delta / (T + delta T)
  VectorXd delta_n;
  VectorXd delta_t;
  /// Lag terms beyond T dropped from delta_t: V(T + delta T) - V(T) - delta_t.
  /// Empty unless delta * T is an integer and the moments reach lag T + delta T - 1.
  std::optional<VectorXd> tail;

  double delta_n_mean() const { return param_mean(delta_n); }
  double delta_t_mean() const { return param_mean(delta_t); }
};

DeltaReport delta_reports(const Moments& m, int T, int N, double delta);

struct Optimality {
  bool ma_preferred = false;
  double lhs = 0.0;  // mean over parameters
  double rhs = 0.0;
  VectorXd lhs_params;
  VectorXd rhs_params;
  /// Special form for N = 1, delta = 1:
  /// sum_t (t/T) C^t  >=  Var_s Ybar + 2 sum_t (T-t)/T alpha_e^t.
  std::optional<double> special_lhs;
  std::optional<double> special_rhs;
};

/// General condition under which one extra action per state reduces variance at
/// least as much as extending the trajectory by delta T states.
Optimality ma_optimality(const Moments& m, int T, int N, double delta);

/// Empirical decomposition from sampled states: `terms[i]` holds K >= 2
/// gradient terms Q(s_i, a_k) grad log pi(a_k | s_i) for K policy actions at the
/// i-th sampled state.
struct McDecomposition {
  int samples = 0;
  int actions_per_state = 0;
  VectorXd var_s;   // Var_s[Ybar], corrected for the finite-K average
  VectorXd evar_a;  // E_s Var_a[Y]
  VectorXd pooled;  // variance of all terms pooled together
  double var_s_mean = 0.0;
  double evar_a_mean = 0.0;
  double pooled_mean = 0.0;
  double var_s_se = 0.0;
  double evar_a_se = 0.0;

  /// Share of the single-action variance explained by the policy.
  double policy_share() const;
};

inline constexpr int kMinDecompositionSamples = 1000;

McDecomposition mc_decomposition(const std::vector<MatrixXd>& terms);

/// Tabular front end: states from the stationary distribution, K policy actions
/// each, scored with exact Q-values.
McDecomposition mc_decomposition(const envs::TabularMDP& mdp, const MatrixXd& logits, int samples, int K, Rng& rng);

}  // namespace pgvlab::variance
