#include "agents/collect.hpp"

#include "common/error.hpp"

namespace pgvlab::agents {

spg::Batch Collector::collect(const spg::Policy& policy, const spg::Critic& critic, int T, double gamma, double lam,
                              Rng& rng, const ExtraFn& extras, const StepHook& hook) {
  require(T >= 1, "collect: T must be >= 1");
  spg::Batch b;
  std::vector<bool> dones, cuts;
  bool stop = false;
  for (int i = 0; i < T && !stop; ++i) {
    if (env_->needs_reset()) {
      env_->reset();
      episode_step_ = 0;
      episode_return_ = 0.0;
    }
    if (extras) b.extras.push_back(extras(*env_));
    const std::vector<double> obs = env_->observation();
    const envs::Action a = policy.sample(obs, rng);
    b.log_probs.push_back(policy.log_prob(obs, a));
    envs::Transition t = envs::step_transition(*env_, a);
    b.time_index.push_back(episode_step_);
    ++episode_step_;
    ++total_steps_;
    episode_return_ += t.reward;
    if (t.done || t.truncated) returns_.push_back(episode_return_);
    dones.push_back(t.done);
    cuts.push_back(t.done || t.truncated);
    b.transitions.push_back(std::move(t));
    if (hook) stop = hook(total_steps_);
  }
  const auto n = b.transitions.size();
  std::vector<std::vector<double>> states, next_states;
  for (const auto& t : b.transitions) {
    states.push_back(t.state);
    next_states.push_back(t.next_state);
  }
  b.values = critic.values(spg::stack_rows(states));
  b.next_values = critic.values(spg::stack_rows(next_states));
  cuts[n - 1] = true;
  std::vector<double> rewards;
  for (const auto& t : b.transitions) rewards.push_back(t.reward);
  auto lr = spg::lambda_returns(rewards, b.values, b.next_values, dones, cuts, gamma, lam);
  b.lambda_returns = std::move(lr.returns);
  b.advantages = std::move(lr.advantages);
  return b;
}

void Collector::restart() {
  env_->reset();
  episode_step_ = 0;
  episode_return_ = 0.0;
}

double evaluate_greedy(envs::Environment& env, const spg::Policy& policy, int episodes) {
  if (episodes <= 0) return 0.0;
  double total = 0.0;
  for (int e = 0; e < episodes; ++e) {
    env.reset();
    for (;;) {
      const auto r = env.step(policy.mode(env.observation()));
      total += r.reward;
      if (r.done || r.truncated) break;
    }
  }
  return total / episodes;
}

}  // namespace pgvlab::agents
