#pragma once

#include "agents/trainer.hpp"
#include "spg/estimator.hpp"

#include <Eigen/Dense>

#include <functional>
#include <span>
#include <string>
#include <vector>

namespace pgvlab::probe {

using spg::Method;

inline constexpr double kExclusionThreshold = 1e-12;

struct ProbeConfig {
  int n_estimates = 125;
  int probe_batch = 2500;  // states per gradient estimate
  int n_checkpoints = 10;
  int extra = 8;           // X for the many-action and branch methods
  std::vector<Method> methods = {Method::ac, Method::qma, Method::mbma, Method::mbpo};

  /// ConfigError when n_estimates < 2 or a size is out of range.
  void validate() const;
};

struct RatioResult {
  double value = 0.0;
  int excluded = 0;  // parameters with |mean| below the threshold
  int total = 0;
};

/// Per-parameter mean of N=1 AC estimates on real single-action batches, with
/// gamma^t weights. ContractError on empty input.
Eigen::VectorXd oracle_gradient(const spg::Policy& policy, std::span<const spg::Batch> batches,
                                double weight_discount);

/// (1/P') sum_p |m_p - o_p| / |m_p| over parameters with |m_p| >= 1e-12, where m
/// is the method mean and o the oracle. DegenerateInputError when every
/// parameter is excluded.
RatioResult relative_bias(const Eigen::VectorXd& method_mean, const Eigen::VectorXd& oracle);

/// (1/P') sum_p Var[g_p] / m_p^2 with the unbiased sample variance over the rows
/// of `samples` (n_estimates x P) and the same exclusion rule.
RatioResult relative_variance(const Eigen::MatrixXd& samples);

struct BiasVarianceRow {
  int checkpoint = 0;
  Method method = Method::ac;
  double rel_bias = 0.0;
  double rel_var = 0.0;
  double mean_grad_norm = 0.0;
  int excluded_params = 0;
};

/// One gradient estimate of `method` on a real batch using the frozen models.
Eigen::VectorXd method_estimate(Method method, const spg::Batch& batch, const spg::Policy& policy,
                                const agents::MethodModels& models, int extra, const agents::AgentConfig& config,
                                Rng& rng);

/// Rows for one checkpoint: n_estimates fresh batches from `probe_env` under the
/// frozen policy, every method estimated on the same batches, bias against
/// the AC mean. The agent is not modified.
std::vector<BiasVarianceRow> probe_checkpoint(int checkpoint, envs::Environment& probe_env,
                                              const agents::Agent& agent, const ProbeConfig& config, Rng& rng);

using RowSink = std::function<void(const BiasVarianceRow&)>;

/// Trains a PPO gathering agent with twin Q-networks and a dynamics model
/// alongside, and probes it at n_checkpoints evenly spaced updates.
/// ContractError when there are fewer updates than checkpoints.
std::vector<BiasVarianceRow> run_probe(const std::string& env_name, const ProbeConfig& config,
                                       const agents::AgentConfig& agent_config, std::uint64_t seed, long total_steps,
                                       const RowSink& sink = nullptr);

}  // namespace pgvlab::probe
