#pragma once

#include "agents/augment.hpp"
#include "agents/collect.hpp"
#include "agents/config.hpp"
#include "agents/ppo.hpp"
#include "agents/q_networks.hpp"
#include "dynamics/model.hpp"
#include "dynamics/replay_buffer.hpp"

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace pgvlab::agents {

struct UpdateReport {
  int x = 0;
  PpoStats ppo;
  std::size_t extra_samples = 0;
  std::size_t simulated_samples = 0;
  double dynamics_loss = 0.0;
  double q_loss = 0.0;
  int flagged_states = 0;
};

/// Policy, critic and whatever models the variant needs, with one private RNG
/// stream per component so that model training never perturbs the policy path.
class Agent {
 public:
  Agent(const envs::Environment& proto, AgentConfig config, std::uint64_t seed);

  const AgentConfig& config() const { return config_; }
  spg::Policy& policy() { return policy_; }
  const spg::Policy& policy() const { return policy_; }
  spg::Critic& critic() { return critic_; }
  const spg::Critic& critic() const { return critic_; }
  Rng& collect_rng() { return collect_rng_; }

  /// Learned models are trained for the variant's needs; the probe turns both on.
  void enable_models(bool q_networks, bool dynamics);
  /// Replaces the learned dynamics in augment() (the learned one keeps training).
  void inject_world_model(std::shared_ptr<const dynamics::WorldModel> model) { injected_ = std::move(model); }

  const QNetworks* q_networks() const { return q_ ? &*q_ : nullptr; }
  const dynamics::DynamicsModel* dynamics_model() const { return dyn_ ? &*dyn_ : nullptr; }
  const dynamics::WorldModel* world_model() const;
  MethodModels models() const { return MethodModels{q_networks(), world_model(), &critic_}; }

  /// Adds the batch to the replay buffer and trains the enabled models on it.
  void train_models(const spg::Batch& batch, UpdateReport& report);
  /// Algorithm step on one real batch: models, augmentation with x, PPO.
  UpdateReport update(const spg::Batch& batch, int x);

 private:
  AgentConfig config_;
  spg::Policy policy_;
  spg::Critic critic_;
  PpoOptimizer opt_;
  std::optional<QNetworks> q_;
  std::optional<dynamics::DynamicsModel> dyn_;
  dynamics::DynamicsOptimizer dyn_opt_;
  dynamics::ReplayBuffer buffer_;
  std::shared_ptr<const dynamics::WorldModel> injected_;
  std::shared_ptr<envs::Environment> terminal_env_;
  envs::ActionSpace space_;
  int obs_dim_ = 0;
  Rng collect_rng_, update_rng_, augment_rng_, model_rng_;
};

spg::PolicySpec policy_spec_for(const envs::Environment& env, const std::vector<int>& hidden);

struct CurvePoint {
  long step = 0;
  double eval_return = 0.0;
};

struct TrainingResult {
  std::vector<CurvePoint> curve;
  int updates = 0;
  long steps = 0;
};

/// Called after every update (and its evaluations) with the real steps so far;
/// returning true ends training.
using UpdateHook = std::function<bool(Agent&, long, const UpdateReport&, const std::vector<CurvePoint>&)>;

/// Full loop: collect T, update, evaluate on a separate greedy environment.
/// Runs floor(total_steps / T) updates; deterministic given the seed.
/// `setup` runs once on the fresh agent before the first batch.
TrainingResult run_training(const std::string& env_name, const AgentConfig& config, std::uint64_t seed,
                            long total_steps, const UpdateHook& hook = nullptr,
                            const std::function<void(Agent&)>& setup = nullptr);

}  // namespace pgvlab::agents
