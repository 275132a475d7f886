#include "envs/tabular_env.hpp"

#include "common/error.hpp"

#include <algorithm>

namespace pgvlab::envs {

TabularEnv::TabularEnv(TabularMDP mdp, std::uint64_t seed, int episode_cap)
    : mdp_(std::move(mdp)), cap_(episode_cap), rng_(seed) {
  mdp_.validate();
  require(episode_cap >= 0, "TabularEnv: episode cap must be >= 0");
}

std::vector<double> TabularEnv::one_hot(int s) const {
  std::vector<double> v(static_cast<std::size_t>(mdp_.n_states), 0.0);
  v[static_cast<std::size_t>(s)] = 1.0;
  return v;
}

int TabularEnv::decode(std::span<const double> obs) {
  return static_cast<int>(std::max_element(obs.begin(), obs.end()) - obs.begin());
}

void TabularEnv::set_state(int s) {
  require(s >= 0 && s < mdp_.n_states, "TabularEnv::set_state: state out of range");
  state_ = s;
  needs_reset_ = false;
}

std::vector<double> TabularEnv::reset() {
  const Eigen::VectorXd& p0 = mdp_.init_dist;
  state_ = static_cast<int>(rng_.categorical(std::span<const double>(p0.data(), static_cast<std::size_t>(p0.size()))));
  steps_ = 0;
  needs_reset_ = false;
  return observation();
}

StepResult TabularEnv::step(const Action& action) {
  if (needs_reset_) throw ContractError("TabularEnv::step called on a finished episode; reset() first");
  require(action.index >= 0 && action.index < mdp_.n_actions, "TabularEnv: action out of range");
  const Eigen::RowVectorXd row = mdp_.kernel[static_cast<std::size_t>(state_)].row(action.index);
  StepResult r;
  r.reward = mdp_.reward(state_, action.index);
  state_ = static_cast<int>(rng_.categorical(std::span<const double>(row.data(), static_cast<std::size_t>(row.size()))));
  ++steps_;
  r.next_state = observation();
  r.truncated = cap_ > 0 && steps_ >= cap_;
  needs_reset_ = r.truncated;
  return r;
}

RewindToken TabularEnv::snapshot() const {
  return RewindToken("tabular", Snapshot{state_, steps_, needs_reset_, rng_});
}

void TabularEnv::restore(const RewindToken& token) {
  const auto* snap = std::any_cast<Snapshot>(&token.state());
  if (token.kind() != "tabular" || snap == nullptr) throw ContractError("TabularEnv::restore: foreign token");
  state_ = snap->state;
  steps_ = snap->steps;
  needs_reset_ = snap->needs_reset;
  rng_ = snap->rng;
}

}  // namespace pgvlab::envs
