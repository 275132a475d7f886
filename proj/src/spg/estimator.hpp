#pragma once

#include "envs/environment.hpp"
#include "spg/policy.hpp"

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

namespace pgvlab::spg {

struct LambdaReturns {
  std::vector<double> returns;
  std::vector<double> advantages;
};

/// TD(lambda) / GAE recursion run backward in time.
///   delta_t = r_t + gamma (1 - done_t) next_value_t - value_t
///   A_t     = delta_t + gamma lam (1 - done_t)(1 - cut_t) A_{t+1}
/// `cuts` marks steps after which the trace must not continue (truncation,
/// episode boundary, end of a branch); the final step is always cut.
LambdaReturns lambda_returns(std::span<const double> rewards, std::span<const double> values,
                             std::span<const double> next_values, const std::vector<bool>& dones,
                             const std::vector<bool>& cuts, double gamma, double lam);

/// Convenience form over a single stream: `values` has one extra trailing entry
/// used as the bootstrap after the last step, and episodes end at dones.
LambdaReturns lambda_returns(std::span<const double> rewards, std::span<const double> values,
                             const std::vector<bool>& dones, double gamma, double lam);

enum class Method { ac, ppo, qma, mbma, mbpo };
std::string method_name(Method m);
Method parse_method(const std::string& name);

/// An additional action drawn at a visited state together with its Q estimate.
struct ExtraSample {
  Action action;
  double q = 0.0;
  double log_prob = 0.0;  // behaviour log-probability at sampling time
};

/// T visited states, each optionally carrying N-1 extra actions.
struct Batch {
  std::vector<envs::Transition> transitions;
  std::vector<int> time_index;  // step within the episode
  std::vector<double> values;
  std::vector<double> next_values;
  std::vector<double> log_probs;
  std::vector<double> lambda_returns;
  std::vector<double> advantages;
  std::vector<std::vector<ExtraSample>> extras;

  std::size_t size() const { return transitions.size(); }
  /// Actions per state; ContractError if states disagree.
  int actions_per_state() const;
  /// Shape checks across all per-step arrays.
  void validate() const;
};

struct GradientEstimate {
  ParamVector grad;
  Method method = Method::ac;
  int n_actions = 1;
  int n_states = 0;
  std::uint64_t seed = 0;
};

/// gamma^t * q * grad log pi(action | obs).
ParamVector grad_term(const Policy& policy, std::span<const double> obs, const Action& action, double q, int t,
                      double gamma);

/// (1/T) sum_t w^t (1/N) sum_n A_t^n grad log pi(a_t^n | s_t). With a baseline the
/// executed action uses its advantage and extra actions use q - V(s_t); without
/// one both use raw Q (lambda_returns for the executed action). `weight_discount`
/// is the w in w^t; 1 drops the discount weighting.
GradientEstimate estimate_spg(const Batch& batch, const Policy& policy, bool use_baseline, double weight_discount,
                              Method method = Method::ac);

using ValueFn = std::function<double(std::span<const double>)>;

/// Discounted reward of one rewound rollout: take `first`, follow the policy for
/// `horizon` further steps, bootstrap with `value` unless the episode terminated.
/// Environment noise is reseeded from `rng` per rollout and the environment is
/// restored to `token` afterwards.
double rewound_q(envs::Environment& env, const envs::RewindToken& token, const Action& first, const Policy& policy,
                 int horizon, const ValueFn& value, double gamma, Rng& rng);

/// n_extra fresh policy actions at the state held by `token`, each scored with
/// rewound_q.
std::vector<ExtraSample> many_action_sample_env(envs::Environment& env, const envs::RewindToken& token,
                                                const Policy& policy, int n_extra, int horizon,
                                                const ValueFn& value, double gamma, Rng& rng);

}  // namespace pgvlab::spg
