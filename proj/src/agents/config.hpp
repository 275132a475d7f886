#pragma once

#include "ndiff/adam.hpp"
#include "ndiff/mlp.hpp"
#include "spg/estimator.hpp"

#include <vector>

namespace pgvlab::agents {

using spg::Method;

struct AgentConfig {
  Method variant = Method::ppo;
  int batch = 2048;          // T real transitions per update
  int extra = 8;             // X simulated samples per state
  int horizon = 12;          // model unroll length for MBMA
  double clip = 0.2;
  double lam = 0.95;
  double gamma = 0.99;
  int epochs = 10;
  int minibatch = 64;
  double value_coef = 0.5;
  double max_grad_norm = 0.5;
  double anneal_fraction = 0.15;
  bool anneal_down = false;  // X falls from X to 0 over the window instead of rising
  bool normalize_advantages = true;
  ndiff::AdamConfig adam{3e-4, 0.9, 0.999, 1e-5};
  std::vector<int> hidden = {64, 64};

  // Model training per update.
  std::vector<int> model_hidden = {64, 64};
  std::size_t buffer_capacity = 25000;
  int dynamics_steps = 200;
  int dynamics_batch = 128;
  int q_epochs = 10;

  // Evaluation.
  int eval_interval = 0;  // real steps between evaluations; 0 means every update
  int eval_episodes = 5;

  /// ConfigError naming the first invalid field.
  void validate() const;
};

/// X in effect after `step` real steps of a `total_steps` run.
int annealed_extra(const AgentConfig& config, long step, long total_steps);

}  // namespace pgvlab::agents
