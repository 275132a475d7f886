#pragma once

#include "agents/augment.hpp"
#include "agents/config.hpp"
#include "ndiff/adam.hpp"
#include "spg/policy.hpp"

#include <vector>

namespace pgvlab::agents {

struct PpoOptimizer {
  ndiff::AdamState policy;
  ndiff::AdamState critic;
};

/// Flattened policy samples (real, extra and simulated) and the real-state
/// value regression set.
struct UpdateData {
  Matrix policy_obs;
  std::vector<Action> actions;
  std::vector<double> old_log_probs;
  std::vector<double> advantages;
  Matrix value_obs;
  std::vector<double> value_targets;
  std::size_t real_samples = 0;
  std::size_t extra_samples = 0;
  std::size_t simulated_samples = 0;
};

/// Extra actions use q - V(s) with the real state's value as the baseline.
/// Advantages are standardized over all samples when configured.
UpdateData make_update_data(const AugmentedBatch& batch, const AgentConfig& config);

struct PpoStats {
  double first_policy_loss = 0.0;  // before any parameter change
  double policy_loss = 0.0;        // last minibatch
  double value_loss = 0.0;
  double mean_grad_norm = 0.0;     // pre-clip global norm
  int steps = 0;
  bool aborted = false;            // non-finite loss; parameters rolled back
};

/// Clipped-surrogate epochs over shuffled minibatches. The value loss covers
/// only the real states, spread over the same number of minibatches per epoch.
PpoStats ppo_update(const UpdateData& data, spg::Policy& policy, spg::Critic& critic, PpoOptimizer& opt,
                    const AgentConfig& config, Rng& rng);

}  // namespace pgvlab::agents
