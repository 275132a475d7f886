#pragma once

#include "agents/config.hpp"
#include "agents/q_networks.hpp"
#include "dynamics/model.hpp"
#include "spg/estimator.hpp"
#include "spg/policy.hpp"

namespace pgvlab::agents {

/// Frozen method models available to augment().
struct MethodModels {
  const QNetworks* q = nullptr;
  const dynamics::WorldModel* world = nullptr;
  const spg::Critic* critic = nullptr;
};

/// Real states with their extra actions plus MBPO's simulated gradient states.
struct AugmentedBatch {
  spg::Batch real;
  spg::Batch simulated;  // empty unless MBPO
  int flagged_states = 0;
};

/// QMA and MBMA attach `x` extra actions to every real state, scored with the
/// smaller twin-Q prediction or a critic-bootstrapped model rollout. MBPO
/// appends an x-step simulated branch starting at the model's prediction of
/// each real successor. PPO and x = 0 leave the batch unchanged. ContractError
/// when the variant's model is missing.
AugmentedBatch augment(const spg::Batch& batch, Method variant, const MethodModels& models, const spg::Policy& policy,
                       int x, const AgentConfig& config, Rng& rng);

}  // namespace pgvlab::agents
