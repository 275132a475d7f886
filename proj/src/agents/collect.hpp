#pragma once

#include "envs/environment.hpp"
#include "spg/estimator.hpp"
#include "spg/policy.hpp"

#include <functional>
#include <vector>

namespace pgvlab::agents {

/// Runs a policy in one environment across calls, resetting finished
/// episodes before the next step.
class Collector {
 public:
  /// Called before each real step with the environment at the state about to be
  /// acted in; returns the extra samples for that state.
  using ExtraFn = std::function<std::vector<spg::ExtraSample>(envs::Environment&)>;
  /// Called after each real step with the running total of real steps; returning
  /// true stops collection early.
  using StepHook = std::function<bool(long)>;

  explicit Collector(envs::Environment& env) : env_(&env) {}

  /// Up to T on-policy transitions with values and lambda-returns. Steps that end
  /// an episode (done or truncated) cut the trace; the last step bootstraps from
  /// the critic.
  spg::Batch collect(const spg::Policy& policy, const spg::Critic& critic, int T, double gamma, double lam, Rng& rng,
                     const ExtraFn& extras = nullptr, const StepHook& hook = nullptr);

  /// Starts a fresh episode before the next step.
  void restart();

  long total_steps() const { return total_steps_; }
  /// Undiscounted returns of episodes finished so far.
  const std::vector<double>& episode_returns() const { return returns_; }
  envs::Environment& env() { return *env_; }

 private:
  envs::Environment* env_;
  int episode_step_ = 0;
  double episode_return_ = 0.0;
  long total_steps_ = 0;
  std::vector<double> returns_;
};

/// Mean undiscounted return of greedy episodes.
double evaluate_greedy(envs::Environment& env, const spg::Policy& policy, int episodes);

}  // namespace pgvlab::agents
