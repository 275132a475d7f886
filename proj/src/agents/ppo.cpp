#include "agents/ppo.hpp"

#include "common/error.hpp"

#include <cmath>
#include <numeric>

namespace pgvlab::agents {

using ndiff::Tape;
using ndiff::Var;

UpdateData make_update_data(const AugmentedBatch& batch, const AgentConfig& config) {
  const spg::Batch& real = batch.real;
  const spg::Batch& sim = batch.simulated;
  UpdateData d;
  std::vector<std::vector<double>> pobs, vobs;
  for (std::size_t i = 0; i < real.size(); ++i) {
    const auto& t = real.transitions[i];
    pobs.push_back(t.state);
    d.actions.push_back(t.action);
    d.old_log_probs.push_back(real.log_probs[i]);
    d.advantages.push_back(real.advantages[i]);
    vobs.push_back(t.state);
    d.value_targets.push_back(real.lambda_returns[i]);
  }
  d.real_samples = real.size();
  if (!real.extras.empty()) {
    for (std::size_t i = 0; i < real.size(); ++i) {
      for (const auto& e : real.extras[i]) {
        pobs.push_back(real.transitions[i].state);
        d.actions.push_back(e.action);
        d.old_log_probs.push_back(e.log_prob);
        d.advantages.push_back(e.q - real.values[i]);
        ++d.extra_samples;
      }
    }
  }
  for (std::size_t i = 0; i < sim.size(); ++i) {
    pobs.push_back(sim.transitions[i].state);
    d.actions.push_back(sim.transitions[i].action);
    d.old_log_probs.push_back(sim.log_probs[i]);
    d.advantages.push_back(sim.advantages[i]);
    ++d.simulated_samples;
  }
  d.policy_obs = spg::stack_rows(pobs);
  d.value_obs = spg::stack_rows(vobs);
  if (config.normalize_advantages && d.advantages.size() > 1) {
    const double n = static_cast<double>(d.advantages.size());
    const double mean = std::accumulate(d.advantages.begin(), d.advantages.end(), 0.0) / n;
    double var = 0.0;
    for (double a : d.advantages) var += (a - mean) * (a - mean);
    const double sd = std::sqrt(var / (n - 1.0));
    for (double& a : d.advantages) a = (a - mean) / (sd + 1e-8);
  }
  return d;
}

namespace {

Matrix gather(const Matrix& m, std::span<const std::size_t> idx) {
  Matrix out(static_cast<Eigen::Index>(idx.size()), m.cols());
  for (std::size_t k = 0; k < idx.size(); ++k) out.row(static_cast<Eigen::Index>(k)) = m.row(static_cast<Eigen::Index>(idx[k]));
  return out;
}

Matrix column(std::span<const double> v, std::span<const std::size_t> idx) {
  Matrix out(static_cast<Eigen::Index>(idx.size()), 1);
  for (std::size_t k = 0; k < idx.size(); ++k) out(static_cast<Eigen::Index>(k), 0) = v[idx[k]];
  return out;
}

}  // namespace

PpoStats ppo_update(const UpdateData& data, spg::Policy& policy, spg::Critic& critic, PpoOptimizer& opt,
                    const AgentConfig& config, Rng& rng) {
  const std::size_t np = data.actions.size();
  const std::size_t nv = data.value_targets.size();
  require(np > 0 && nv > 0, "ppo_update: empty update data");
  const auto mb = static_cast<std::size_t>(config.minibatch);
  const std::size_t chunks = (np + mb - 1) / mb;

  const spg::ParamVector policy_backup = policy.params();
  const spg::ParamVector critic_backup = critic.params();
  const PpoOptimizer opt_backup = opt;

  std::vector<std::size_t> porder(np), vorder(nv);
  std::iota(porder.begin(), porder.end(), 0);
  std::iota(vorder.begin(), vorder.end(), 0);
  PpoStats stats;
  double norm_acc = 0.0;
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    rng.shuffle(porder.begin(), porder.end());
    rng.shuffle(vorder.begin(), vorder.end());
    for (std::size_t c = 0; c < chunks; ++c) {
      const std::span<const std::size_t> pi(porder.data() + c * mb, std::min(np, (c + 1) * mb) - c * mb);
      const std::size_t v0 = c * nv / chunks, v1 = (c + 1) * nv / chunks;
      const std::span<const std::size_t> vi(vorder.data() + v0, v1 - v0);

      Tape tape;
      std::vector<Action> acts;
      for (std::size_t i : pi) acts.push_back(data.actions[i]);
      const Var lp = policy.log_prob(tape, policy.params(), gather(data.policy_obs, pi), acts);
      const Var ratio = ndiff::exp(lp - tape.constant(column(data.old_log_probs, pi)));
      const Var adv = tape.constant(column(data.advantages, pi));
      const Var surr = ndiff::minimum(ratio * adv, ndiff::clamp(ratio, 1.0 - config.clip, 1.0 + config.clip) * adv);
      const Var policy_loss = -ndiff::mean(surr);
      Var loss = policy_loss;
      double vl = 0.0;
      if (!vi.empty()) {
        const Var v = critic.forward(tape, critic.params(), gather(data.value_obs, vi));
        const Var value_loss = ndiff::mean(ndiff::square(v - tape.constant(column(data.value_targets, vi))));
        vl = tape.scalar(value_loss);
        loss = loss + config.value_coef * value_loss;
      }
      const double l = tape.scalar(loss);
      if (!std::isfinite(l)) {
        policy.params() = policy_backup;
        critic.params() = critic_backup;
        opt = opt_backup;
        stats.aborted = true;
        return stats;
      }
      if (stats.steps == 0) stats.first_policy_loss = tape.scalar(policy_loss);
      tape.backward(loss);
      ndiff::ParamVector gp = tape.gradient(policy.params());
      ndiff::ParamVector gc = tape.gradient(critic.params());
      ndiff::ParamVector* grads[] = {&gp, &gc};
      norm_acc += ndiff::clip_global_norm(grads, config.max_grad_norm);
      ndiff::adam_step(policy.params(), gp, opt.policy, config.adam);
      ndiff::adam_step(critic.params(), gc, opt.critic, config.adam);
      stats.policy_loss = tape.scalar(policy_loss);
      stats.value_loss = vl;
      ++stats.steps;
    }
  }
  stats.mean_grad_norm = norm_acc / stats.steps;
  return stats;
}

}  // namespace pgvlab::agents
