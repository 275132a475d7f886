#include "agents/fig1.hpp"

#include "agents/collect.hpp"
#include "agents/trainer.hpp"
#include "common/error.hpp"
#include "common/interrupt.hpp"
#include "envs/environment.hpp"

#include <numeric>

namespace pgvlab::agents {

void Fig1Config::validate() const {
  if (batch < 1 || n_actions < 1 || horizon < 0 || max_steps < 1 || eval_every < 1 || eval_window < 1 ||
      critic_epochs < 0 || critic_minibatch < 1)
    throw ConfigError("fig1 config: sizes out of range");
  if (!(gamma >= 0.0 && gamma <= 1.0) || !(lam >= 0.0 && lam <= 1.0))
    throw ConfigError("fig1 config: gamma and lam must lie in [0, 1]");
}

namespace {

double window_mean(const std::vector<double>& v, int window) {
  const auto n = std::min<std::size_t>(v.size(), static_cast<std::size_t>(window));
  if (n == 0) return 0.0;
  return std::accumulate(v.end() - static_cast<std::ptrdiff_t>(n), v.end(), 0.0) / static_cast<double>(n);
}

void fit_critic(spg::Critic& critic, ndiff::AdamState& opt, const spg::Batch& b, const Fig1Config& c, Rng& rng) {
  const std::size_t n = b.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  const auto mb = static_cast<std::size_t>(c.critic_minibatch);
  for (int e = 0; e < c.critic_epochs; ++e) {
    rng.shuffle(order.begin(), order.end());
    for (std::size_t s = 0; s < n; s += mb) {
      const std::size_t end = std::min(n, s + mb);
      std::vector<std::vector<double>> rows;
      ndiff::Matrix y(static_cast<Eigen::Index>(end - s), 1);
      for (std::size_t k = s; k < end; ++k) {
        rows.push_back(b.transitions[order[k]].state);
        y(static_cast<Eigen::Index>(k - s), 0) = b.lambda_returns[order[k]];
      }
      ndiff::Tape tape;
      const auto v = critic.forward(tape, critic.params(), spg::stack_rows(rows));
      const auto loss = ndiff::mean(ndiff::square(v - tape.constant(y)));
      tape.backward(loss);
      ndiff::adam_step(critic.params(), tape.gradient(critic.params()), opt, c.critic_adam);
    }
  }
}

}  // namespace

Fig1Result run_fig1_cell(const Fig1Config& config, std::uint64_t seed) {
  config.validate();
  auto env = envs::make_environment("cartpole", derive_seed(seed, 1));
  auto eval_env = envs::make_environment("cartpole", derive_seed(seed, 2));
  spg::Policy policy(policy_spec_for(*env, config.hidden));
  spg::Critic critic(env->obs_dim(), config.hidden);
  Rng init(derive_seed(seed, 3));
  policy.init(init);
  critic.init(init);
  Rng act_rng(derive_seed(seed, 4)), extra_rng(derive_seed(seed, 5)), critic_rng(derive_seed(seed, 6));
  ndiff::AdamState popt, copt;

  Fig1Result result;
  const double initial = evaluate_greedy(*eval_env, policy, 1);
  bool solved = false;
  const spg::ValueFn value = [&critic](std::span<const double> s) { return critic.value(s); };
  const Collector::ExtraFn extras = [&](envs::Environment& e) {
    if (config.n_actions <= 1) return std::vector<spg::ExtraSample>{};
    const auto token = e.snapshot();
    return spg::many_action_sample_env(e, token, policy, config.n_actions - 1, config.horizon, value, config.gamma,
                                       extra_rng);
  };
  const Collector::StepHook hook = [&](long steps) {
    if (steps % config.eval_every == 0) {
      result.evals.push_back(evaluate_greedy(*eval_env, policy, 1));
      if (static_cast<int>(result.evals.size()) >= config.eval_window &&
          window_mean(result.evals, config.eval_window) >= config.solve_threshold) {
        solved = true;
        result.steps_to_solve = steps;
      }
    }
    return solved || steps >= config.max_steps;
  };

  Collector collector(*env);
  while (!solved && collector.total_steps() < config.max_steps) {
    throw_if_interrupted();
    const spg::Batch b =
        collector.collect(policy, critic, config.batch, config.gamma, config.lam, act_rng, extras, hook);
    if (solved || static_cast<int>(b.size()) < config.batch) break;
    const auto est = spg::estimate_spg(b, policy, true, 1.0, spg::Method::ac);
    ndiff::ParamVector descent = est.grad;
    for (double& g : descent.values()) g = -g;
    ndiff::adam_step(policy.params(), descent, popt, config.policy_adam);
    fit_critic(critic, copt, b, config, critic_rng);
    ++result.updates;
  }
  const double final_mean = window_mean(result.evals, config.eval_window);
  result.mean_update_gain = result.updates > 0 ? (final_mean - initial) / result.updates : 0.0;
  return result;
}

}  // namespace pgvlab::agents
