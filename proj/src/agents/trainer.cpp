#include "agents/trainer.hpp"

#include "common/error.hpp"
#include "common/interrupt.hpp"

namespace pgvlab::agents {

namespace {

enum Stream : std::uint64_t { kInit = 11, kCollect, kUpdate, kAugment, kModel, kEnv, kEval };

}  // namespace

spg::PolicySpec policy_spec_for(const envs::Environment& env, const std::vector<int>& hidden) {
  spg::PolicySpec spec;
  spec.obs_dim = env.obs_dim();
  spec.space = env.action_space();
  spec.hidden = hidden;
  return spec;
}

Agent::Agent(const envs::Environment& proto, AgentConfig config, std::uint64_t seed)
    : config_(std::move(config)),
      policy_(policy_spec_for(proto, config_.hidden)),
      critic_(proto.obs_dim(), config_.hidden),
      buffer_(config_.buffer_capacity),
      terminal_env_(proto.clone()),
      space_(proto.action_space()),
      obs_dim_(proto.obs_dim()),
      collect_rng_(derive_seed(seed, kCollect)),
      update_rng_(derive_seed(seed, kUpdate)),
      augment_rng_(derive_seed(seed, kAugment)),
      model_rng_(derive_seed(seed, kModel)) {
  config_.validate();
  Rng init(derive_seed(seed, kInit));
  policy_.init(init);
  critic_.init(init);
  const bool need_q = config_.variant == Method::qma;
  const bool need_dyn = config_.variant == Method::mbma || config_.variant == Method::mbpo;
  enable_models(need_q, need_dyn);
}

void Agent::enable_models(bool q_networks, bool dynamics) {
  if (q_networks && !q_) {
    q_.emplace(obs_dim_, space_, config_.model_hidden, config_.adam);
    q_->init(model_rng_);
  }
  if (!q_networks) q_.reset();
  if (dynamics && !dyn_) {
    dynamics::DynamicsConfig dc;
    dc.hidden = config_.model_hidden;
    dc.adam = config_.adam;
    dyn_.emplace(obs_dim_, space_, dc);
    dyn_->init(model_rng_);
    auto env = terminal_env_;
    dyn_->set_terminal([env](std::span<const double> s) { return env->is_terminal_state(s); });
    dyn_opt_ = {};
  }
  if (!dynamics) dyn_.reset();
}

const dynamics::WorldModel* Agent::world_model() const {
  if (injected_) return injected_.get();
  return dyn_ ? &*dyn_ : nullptr;
}

void Agent::train_models(const spg::Batch& batch, UpdateReport& report) {
  if (dyn_) {
    for (const auto& t : batch.transitions) buffer_.push(t);
    report.dynamics_loss =
        dynamics::train_dynamics(*dyn_, dyn_opt_, buffer_, config_.dynamics_steps, config_.dynamics_batch, model_rng_)
            .transition;
  }
  if (q_ && config_.q_epochs > 0) {
    std::vector<std::vector<double>> rows;
    std::vector<Action> acts;
    for (const auto& t : batch.transitions) {
      rows.push_back(t.state);
      acts.push_back(t.action);
    }
    report.q_loss = q_->train(spg::stack_rows(rows), acts, batch.lambda_returns, config_.q_epochs, config_.minibatch,
                              model_rng_);
  }
}

UpdateReport Agent::update(const spg::Batch& batch, int x) {
  UpdateReport report;
  report.x = x;
  train_models(batch, report);
  const AugmentedBatch aug = augment(batch, config_.variant, models(), policy_, x, config_, augment_rng_);
  report.flagged_states = aug.flagged_states;
  const UpdateData data = make_update_data(aug, config_);
  report.extra_samples = data.extra_samples;
  report.simulated_samples = data.simulated_samples;
  report.ppo = ppo_update(data, policy_, critic_, opt_, config_, update_rng_);
  return report;
}

TrainingResult run_training(const std::string& env_name, const AgentConfig& config, std::uint64_t seed,
                            long total_steps, const UpdateHook& hook, const std::function<void(Agent&)>& setup) {
  config.validate();
  auto env = envs::make_environment(env_name, derive_seed(seed, kEnv));
  auto eval_env = envs::make_environment(env_name, derive_seed(seed, kEval));
  Agent agent(*env, config, seed);
  if (setup) setup(agent);
  Collector collector(*env);
  TrainingResult result;
  const long interval = config.eval_interval > 0 ? config.eval_interval : config.batch;
  long next_eval = interval;
  while (collector.total_steps() + config.batch <= total_steps) {
    throw_if_interrupted();
    const int x = annealed_extra(config, collector.total_steps(), total_steps);
    const spg::Batch batch = collector.collect(agent.policy(), agent.critic(), config.batch, config.gamma, config.lam,
                                               agent.collect_rng());
    const UpdateReport report = agent.update(batch, x);
    ++result.updates;
    while (collector.total_steps() >= next_eval) {
      result.curve.push_back({next_eval, evaluate_greedy(*eval_env, agent.policy(), config.eval_episodes)});
      next_eval += interval;
    }
    if (hook && hook(agent, collector.total_steps(), report, result.curve)) break;
  }
  result.steps = collector.total_steps();
  return result;
}

}  // namespace pgvlab::agents
