#include "agents/augment.hpp"

#include "common/error.hpp"
#include "dynamics/simulate.hpp"

#include <cmath>

namespace pgvlab::agents {

namespace {

Matrix states_of(const spg::Batch& b) {
  std::vector<std::vector<double>> rows;
  rows.reserve(b.size());
  for (const auto& t : b.transitions) rows.push_back(t.state);
  return spg::stack_rows(rows);
}

// x rows per state, state-major.
Matrix repeat_rows(const Matrix& m, int x) {
  Matrix out(m.rows() * x, m.cols());
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (int k = 0; k < x; ++k) out.row(r * x + k) = m.row(r);
  return out;
}

}  // namespace

AugmentedBatch augment(const spg::Batch& batch, Method variant, const MethodModels& models, const spg::Policy& policy,
                       int x, const AgentConfig& config, Rng& rng) {
  require(x >= 0, "augment: x must be >= 0");
  AugmentedBatch out;
  out.real = batch;
  if (variant == Method::ppo || variant == Method::ac || x == 0 || batch.size() == 0) return out;
  require(models.critic != nullptr, "augment: critic required");
  const auto T = static_cast<Eigen::Index>(batch.size());
  const Matrix states = states_of(batch);

  if (variant == Method::qma || variant == Method::mbma) {
    if (variant == Method::qma) require(models.q != nullptr, "augment: QMA needs Q-networks");
    if (variant == Method::mbma) require(models.world != nullptr, "augment: MBMA needs a dynamics model");
    const Matrix rows = repeat_rows(states, x);
    const std::vector<Action> acts = policy.sample_batch(rows, rng);
    const std::vector<double> lps = policy.log_prob_batch(rows, acts);
    std::vector<double> q;
    if (variant == Method::qma) {
      q = models.q->min_q(rows, acts);
    } else {
      auto sim = dynamics::simulate_q(*models.world, dynamics::critic_values(*models.critic), policy, rows, acts,
                                      config.horizon, config.gamma, config.lam, rng);
      out.flagged_states = sim.flagged;
      q = std::move(sim.q);
    }
    out.real.extras.assign(static_cast<std::size_t>(T), {});
    for (Eigen::Index r = 0; r < T; ++r) {
      auto& e = out.real.extras[static_cast<std::size_t>(r)];
      for (int k = 0; k < x; ++k) {
        const auto i = static_cast<std::size_t>(r * x + k);
        e.push_back(spg::ExtraSample{acts[i], q[i], lps[i]});
      }
    }
    return out;
  }

  require(variant == Method::mbpo, "augment: unknown variant");
  require(models.world != nullptr, "augment: MBPO needs a dynamics model");
  // Branches start at the predicted successor of each real (s, a); states whose
  // real or predicted successor is terminal get no branch.
  std::vector<Action> acts;
  for (const auto& t : batch.transitions) acts.push_back(t.action);
  const dynamics::ModelStep first = models.world->step(states, acts, rng);
  std::vector<Eigen::Index> keep;
  for (Eigen::Index r = 0; r < T; ++r) {
    const auto& t = batch.transitions[static_cast<std::size_t>(r)];
    const std::span<const double> pred(first.next_obs.row(r).data(), static_cast<std::size_t>(first.next_obs.cols()));
    bool finite = true;
    for (double v : pred) finite = finite && std::isfinite(v);
    if (!t.done && finite && !models.world->terminal(pred)) keep.push_back(r);
  }
  if (keep.empty()) return out;
  Matrix starts(static_cast<Eigen::Index>(keep.size()), states.cols());
  for (std::size_t i = 0; i < keep.size(); ++i) starts.row(static_cast<Eigen::Index>(i)) = first.next_obs.row(keep[i]);
  auto sim = dynamics::simulate_rollout(*models.world, dynamics::critic_values(*models.critic), policy, starts, x,
                                        config.gamma, config.lam, rng);
  out.flagged_states += sim.flagged;
  // Depth is counted from the real state's episode step.
  for (std::size_t i = 0; i < sim.batch.size(); ++i) {
    const auto origin = keep[static_cast<std::size_t>(sim.start[i])];
    sim.batch.time_index[i] += batch.time_index[static_cast<std::size_t>(origin)] + 1;
  }
  out.simulated = std::move(sim.batch);
  return out;
}

}  // namespace pgvlab::agents
