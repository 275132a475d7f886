#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <vector>

namespace pgvlab::envs {

/// Row-stochastic S x A matrix of action probabilities.
using TabularPolicy = Eigen::MatrixXd;

/// Finite MDP (S, A, R, p, gamma) with initial distribution p0.
/// kernel[s](a, s') = p(s' | s, a).
struct TabularMDP {
  int n_states = 0;
  int n_actions = 0;
  Eigen::MatrixXd reward;               // S x A
  std::vector<Eigen::MatrixXd> kernel;  // S entries of A x S
  double gamma = 0.9;
  Eigen::VectorXd init_dist;            // length S

  double p(int s, int a, int next) const { return kernel[static_cast<std::size_t>(s)](a, next); }
  /// Throws ContractError when an invariant (row sums, gamma range, shapes) fails.
  void validate() const;
};

inline constexpr int kMaxTabularSize = 64;

/// Kernel rows are (1 - mixing)/S + mixing * Dirichlet(1) draws; rewards are
/// uniform in [-reward_scale, reward_scale]; p0 is uniform. mixing = 0 yields an
/// action-independent uniform kernel (a contextual bandit chain).
TabularMDP generate_random_mdp(std::uint64_t seed, int n_states, int n_actions, double reward_scale,
                               double mixing, double gamma = 0.9);

/// Row-wise softmax of an S x A logit table.
TabularPolicy softmax_policy(const Eigen::MatrixXd& logits);
TabularPolicy uniform_policy(const TabularMDP& mdp);

/// p^pi(s'|s) = sum_a pi(a|s) p(s'|s,a).
Eigen::MatrixXd marginal_kernel(const TabularMDP& mdp, const TabularPolicy& policy);

/// Power iteration to the unique fixed point p = p K. NumericError when the
/// iteration cap is hit.
Eigen::VectorXd stationary_distribution(const TabularMDP& mdp, const TabularPolicy& policy,
                                        int max_iterations = 1'000'000);

/// (p^pi)^t; t = 0 gives the identity.
Eigen::MatrixXd t_step_kernel(const TabularMDP& mdp, const TabularPolicy& policy, int t);

struct PolicyValues {
  Eigen::VectorXd v;  // S
  Eigen::MatrixXd q;  // S x A
};

/// Exact V and Q from the linear system (I - gamma P^pi) V = r^pi.
PolicyValues evaluate_policy(const TabularMDP& mdp, const TabularPolicy& policy);

void validate_policy(const TabularMDP& mdp, const TabularPolicy& policy);

}  // namespace pgvlab::envs
