#pragma once

#include "envs/environment.hpp"
#include "envs/tabular_mdp.hpp"

namespace pgvlab::envs {

/// A TabularMDP exposed through the Environment interface: one-hot observations,
/// discrete actions, no terminal states. A nonzero cap truncates episodes.
class TabularEnv final : public Environment {
 public:
  TabularEnv(TabularMDP mdp, std::uint64_t seed, int episode_cap = 0);

  std::string name() const override { return "tabular"; }
  int obs_dim() const override { return mdp_.n_states; }
  ActionSpace action_space() const override { return ActionSpace{true, mdp_.n_actions, 0, 0.0, 0.0}; }

  std::vector<double> reset() override;
  StepResult step(const Action& action) override;
  std::vector<double> observation() const override { return one_hot(state_); }
  bool needs_reset() const override { return needs_reset_; }

  RewindToken snapshot() const override;
  void restore(const RewindToken& token) override;
  int episode_cap() const override { return cap_; }
  void seed(std::uint64_t seed) override { rng_ = Rng(seed); }
  std::unique_ptr<Environment> clone() const override { return std::make_unique<TabularEnv>(*this); }

  const TabularMDP& mdp() const { return mdp_; }
  int state() const { return state_; }
  void set_state(int s);

  std::vector<double> one_hot(int s) const;
  /// Index of the largest coordinate of an observation.
  static int decode(std::span<const double> obs);

 private:
  struct Snapshot {
    int state;
    int steps;
    bool needs_reset;
    Rng rng;
  };

  TabularMDP mdp_;
  int state_ = 0;
  int steps_ = 0;
  int cap_ = 0;
  bool needs_reset_ = true;
  Rng rng_;
};

}  // namespace pgvlab::envs
