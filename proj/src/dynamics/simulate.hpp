#pragma once

#include "dynamics/model.hpp"
#include "spg/estimator.hpp"
#include "spg/policy.hpp"

#include <functional>
#include <vector>

namespace pgvlab::dynamics {

/// Critic evaluated on a batch of observations.
using BatchValueFn = std::function<std::vector<double>(const Matrix&)>;

BatchValueFn critic_values(const spg::Critic& critic);

struct SimulatedQ {
  std::vector<double> q;
  /// Rows whose predicted state went non-finite and were clamped.
  int flagged = 0;
};

/// For every row (s, a): unroll the model `horizon` steps past the first
/// transition, drawing intermediate actions from the policy, and return the
/// lambda-return of predicted rewards bootstrapped with the critic. horizon = 0
/// gives r(s,a) + gamma V(s'). Predicted terminal states stop a row's rollout.
SimulatedQ simulate_q(const WorldModel& model, const BatchValueFn& value, const spg::Policy& policy,
                      const Matrix& states, std::span<const Action> actions, int horizon, double gamma, double lam,
                      Rng& rng);

/// Single-row convenience form.
double simulate_q(const WorldModel& model, const BatchValueFn& value, const spg::Policy& policy,
                  std::span<const double> state, const Action& action, int horizon, double gamma, double lam,
                  Rng& rng);

/// Branch rollouts of `length` policy steps from every start row, returned as a
/// batch (row-major by start, then depth) with values, behaviour log-probs and
/// lambda-returns cut at the end of each branch. time_index holds the depth.
/// A branch that reaches a predicted terminal state stops early.
struct SimulatedRollouts {
  spg::Batch batch;
  std::vector<int> start;  // originating start row per transition
  int flagged = 0;
};

SimulatedRollouts simulate_rollout(const WorldModel& model, const BatchValueFn& value, const spg::Policy& policy,
                                   const Matrix& starts, int length, double gamma, double lam, Rng& rng);

}  // namespace pgvlab::dynamics
