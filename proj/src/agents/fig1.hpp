#pragma once

#include "ndiff/adam.hpp"

#include <cstdint>
#include <optional>
#include <vector>

namespace pgvlab::agents {

/// One cell of the CartPole batch-size x actions-per-state study: a plain
/// actor-critic whose extra actions are scored by rewinding the environment.
struct Fig1Config {
  int batch = 128;
  int n_actions = 1;        // N, executed action included
  int horizon = 12;         // rewound steps before the critic bootstrap
  long max_steps = 100000;  // real environment steps
  int eval_every = 50;
  int eval_window = 25;
  double solve_threshold = 190.0;
  double gamma = 0.99;
  double lam = 0.95;
  std::vector<int> hidden = {64, 64};
  ndiff::AdamConfig policy_adam{1e-3, 0.9, 0.999, 1e-5};
  ndiff::AdamConfig critic_adam{1e-3, 0.9, 0.999, 1e-5};
  int critic_epochs = 5;
  int critic_minibatch = 64;

  void validate() const;
};

struct Fig1Result {
  std::optional<long> steps_to_solve;  // real steps only
  double mean_update_gain = 0.0;       // (final window mean - initial eval) / updates
  int updates = 0;
  std::vector<double> evals;           // greedy returns every eval_every steps
};

Fig1Result run_fig1_cell(const Fig1Config& config, std::uint64_t seed);

}  // namespace pgvlab::agents
