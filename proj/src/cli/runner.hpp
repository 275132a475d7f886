#pragma once

#include "cli/config.hpp"
#include "envs/tabular_mdp.hpp"

#include <Eigen/Dense>

#include <string>

namespace pgvlab::cli {

struct RunOptions {
  std::string out_dir;   // overrides config.out when non-empty
  int workers = 0;       // 0 means one per hardware thread
  long seed_offset = 0;  // added to every configured seed
};

inline constexpr int kExitOk = 0;
inline constexpr int kExitRuntime = 1;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitInterrupted = 130;

struct RunOutcome {
  int exit_code = kExitOk;
  std::string message;  // first failure, empty on success
  int units = 0;
  int completed = 0;
};

struct TheoryCase {
  envs::TabularMDP mdp;
  Eigen::MatrixXd logits;
};

/// Seed of the index-th MDP drawn for a configured seed.
std::uint64_t theory_mdp_seed(std::uint64_t master_seed, long seed, int index);
/// Random ergodic MDP and softmax logits within the theory ranges.
TheoryCase make_theory_case(const TheoryConfig& t, std::uint64_t mdp_seed);

/// Workers after the PGVLAB_THREADS cap and the unit count.
int effective_workers(int requested, int units);

/// Runs every (seed x cell) unit of the experiment and writes
/// <kind>.csv plus run_record.csv into the output directory. Rows reach the
/// data CSV in unit order whatever the worker count. Never throws.
RunOutcome run_experiment(const ExperimentConfig& config, const RunOptions& options);

}  // namespace pgvlab::cli
