#include "probe/probe.hpp"

#include "common/error.hpp"
#include "common/interrupt.hpp"

#include <cmath>

namespace pgvlab::probe {

void ProbeConfig::validate() const {
  if (n_estimates < 2) throw ConfigError("probe config: n_estimates must be >= 2");
  if (probe_batch < 1 || n_checkpoints < 1 || extra < 0) throw ConfigError("probe config: sizes out of range");
  if (methods.empty()) throw ConfigError("probe config: no methods");
}

namespace {

Eigen::VectorXd as_vector(const spg::ParamVector& p) {
  return Eigen::Map<const Eigen::VectorXd>(p.values().data(), static_cast<Eigen::Index>(p.size()));
}

}  // namespace

Eigen::VectorXd oracle_gradient(const spg::Policy& policy, std::span<const spg::Batch> batches,
                                double weight_discount) {
  require(!batches.empty(), "oracle_gradient: no batches");
  Eigen::VectorXd acc = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(policy.params().size()));
  for (const auto& b : batches) {
    spg::Batch single = b;
    single.extras.clear();
    acc += as_vector(spg::estimate_spg(single, policy, true, weight_discount, Method::ac).grad);
  }
  return acc / static_cast<double>(batches.size());
}

RatioResult relative_bias(const Eigen::VectorXd& method_mean, const Eigen::VectorXd& oracle) {
  require_shape(method_mean.size() == oracle.size(), "relative_bias: parameter counts differ");
  RatioResult r;
  r.total = static_cast<int>(method_mean.size());
  double acc = 0.0;
  int used = 0;
  for (Eigen::Index p = 0; p < method_mean.size(); ++p) {
    const double m = std::abs(method_mean(p));
    if (!(m >= kExclusionThreshold)) {
      ++r.excluded;
      continue;
    }
    acc += std::abs(method_mean(p) - oracle(p)) / m;
    ++used;
  }
  if (used == 0) throw DegenerateInputError("relative_bias: every parameter is below the exclusion threshold");
  r.value = acc / used;
  return r;
}

RatioResult relative_variance(const Eigen::MatrixXd& samples) {
  require(samples.rows() >= 2, "relative_variance: need at least two estimates");
  RatioResult r;
  r.total = static_cast<int>(samples.cols());
  const Eigen::RowVectorXd mean = samples.colwise().mean();
  const Eigen::RowVectorXd var =
      (samples.rowwise() - mean).array().square().colwise().sum() / static_cast<double>(samples.rows() - 1);
  double acc = 0.0;
  int used = 0;
  for (Eigen::Index p = 0; p < samples.cols(); ++p) {
    const double m = std::abs(mean(p));
    if (!(m >= kExclusionThreshold)) {
      ++r.excluded;
      continue;
    }
    acc += var(p) / (m * m);
    ++used;
  }
  if (used == 0) throw DegenerateInputError("relative_variance: every parameter is below the exclusion threshold");
  r.value = acc / used;
  return r;
}

Eigen::VectorXd method_estimate(Method method, const spg::Batch& batch, const spg::Policy& policy,
                                const agents::MethodModels& models, int extra, const agents::AgentConfig& config,
                                Rng& rng) {
  if (method == Method::ac || method == Method::ppo) {
    spg::Batch single = batch;
    single.extras.clear();
    return as_vector(spg::estimate_spg(single, policy, true, config.gamma, Method::ac).grad);
  }
  const agents::AugmentedBatch aug = agents::augment(batch, method, models, policy, extra, config, rng);
  if (method != Method::mbpo) return as_vector(spg::estimate_spg(aug.real, policy, true, config.gamma, method).grad);
  // Real and simulated states form one single-action batch.
  spg::Batch all = aug.real;
  const auto& s = aug.simulated;
  all.transitions.insert(all.transitions.end(), s.transitions.begin(), s.transitions.end());
  all.time_index.insert(all.time_index.end(), s.time_index.begin(), s.time_index.end());
  all.values.insert(all.values.end(), s.values.begin(), s.values.end());
  all.next_values.insert(all.next_values.end(), s.next_values.begin(), s.next_values.end());
  all.log_probs.insert(all.log_probs.end(), s.log_probs.begin(), s.log_probs.end());
  all.lambda_returns.insert(all.lambda_returns.end(), s.lambda_returns.begin(), s.lambda_returns.end());
  all.advantages.insert(all.advantages.end(), s.advantages.begin(), s.advantages.end());
  return as_vector(spg::estimate_spg(all, policy, true, config.gamma, method).grad);
}

std::vector<BiasVarianceRow> probe_checkpoint(int checkpoint, envs::Environment& probe_env,
                                              const agents::Agent& agent, const ProbeConfig& config, Rng& rng) {
  config.validate();
  const auto& cfg = agent.config();
  const auto P = static_cast<Eigen::Index>(agent.policy().params().size());
  agents::Collector collector(probe_env);
  std::vector<Eigen::MatrixXd> samples(config.methods.size(), Eigen::MatrixXd(config.n_estimates, P));
  Eigen::MatrixXd ac(config.n_estimates, P);
  for (int i = 0; i < config.n_estimates; ++i) {
    throw_if_interrupted();
    // A fresh episode start keeps successive batches independent.
    collector.restart();
    const spg::Batch b =
        collector.collect(agent.policy(), agent.critic(), config.probe_batch, cfg.gamma, cfg.lam, rng);
    ac.row(i) = method_estimate(Method::ac, b, agent.policy(), agent.models(), 0, cfg, rng).transpose();
    for (std::size_t m = 0; m < config.methods.size(); ++m) {
      const Method method = config.methods[m];
      if (method == Method::ac)
        samples[m].row(i) = ac.row(i);
      else
        samples[m].row(i) =
            method_estimate(method, b, agent.policy(), agent.models(), config.extra, cfg, rng).transpose();
    }
  }
  const Eigen::VectorXd oracle = ac.colwise().mean().transpose();
  std::vector<BiasVarianceRow> rows;
  for (std::size_t m = 0; m < config.methods.size(); ++m) {
    BiasVarianceRow row;
    row.checkpoint = checkpoint;
    row.method = config.methods[m];
    const Eigen::VectorXd mean = samples[m].colwise().mean().transpose();
    const RatioResult bias = relative_bias(mean, oracle);
    const RatioResult var = relative_variance(samples[m]);
    row.rel_bias = bias.value;
    row.rel_var = var.value;
    row.excluded_params = bias.excluded;
    row.mean_grad_norm = samples[m].rowwise().norm().mean();
    rows.push_back(row);
  }
  return rows;
}

std::vector<BiasVarianceRow> run_probe(const std::string& env_name, const ProbeConfig& config,
                                       const agents::AgentConfig& agent_config, std::uint64_t seed, long total_steps,
                                       const RowSink& sink) {
  config.validate();
  agents::AgentConfig gather = agent_config;
  gather.variant = Method::ppo;
  const long updates = total_steps / gather.batch;
  if (updates < config.n_checkpoints)
    throw ContractError("run_probe: " + std::to_string(updates) + " updates cannot host " +
                        std::to_string(config.n_checkpoints) + " checkpoints");
  auto probe_env = envs::make_environment(env_name, derive_seed(seed, 101));
  Rng probe_rng(derive_seed(seed, 102));
  std::vector<BiasVarianceRow> rows;
  int done = 0;
  long update = 0;
  agents::run_training(env_name, gather, seed, total_steps,
                       [&](agents::Agent& agent, long, const agents::UpdateReport&, const std::vector<agents::CurvePoint>&) {
                         ++update;
                         // Checkpoint k sits at update ceil((k+1) * updates / n).
                         const long target = ((done + 1) * updates + config.n_checkpoints - 1) / config.n_checkpoints;
                         if (update >= target && done < config.n_checkpoints) {
                           for (const auto& r : probe_checkpoint(done, *probe_env, agent, config, probe_rng)) {
                             if (sink) sink(r);
                             rows.push_back(r);
                           }
                           ++done;
                         }
                         return false;
                       },
                       [](agents::Agent& agent) { agent.enable_models(true, true); });
  return rows;
}

}  // namespace pgvlab::probe
