#pragma once

#include "common/rng.hpp"

#include <any>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace pgvlab::envs {

struct ActionSpace {
  bool discrete = true;
  int n = 0;          // number of discrete actions
  int dim = 0;        // continuous action dimension
  double low = -1.0;  // continuous bounds (per dimension)
  double high = 1.0;

  /// Width of the action's network encoding: one-hot for discrete, raw otherwise.
  int encoded_dim() const { return discrete ? n : dim; }
};

struct Action {
  int index = -1;              // discrete actions
  std::vector<double> values;  // continuous actions

  static Action discrete(int i) { return Action{i, {}}; }
  static Action continuous(std::vector<double> v) { return Action{-1, std::move(v)}; }
  bool operator==(const Action&) const = default;
};

/// Writes the network encoding of `a` into `out` (length space.encoded_dim()).
void encode_action(const ActionSpace& space, const Action& a, std::span<double> out);

struct StepResult {
  std::vector<double> next_state;
  double reward = 0.0;
  bool done = false;       // terminal: no bootstrapping past this step
  bool truncated = false;  // time limit: bootstrap from next_state
};

struct Transition {
  std::vector<double> state;
  Action action;
  double reward = 0.0;
  std::vector<double> next_state;
  bool done = false;
  bool truncated = false;

  bool operator==(const Transition&) const = default;
};

/// Opaque snapshot of an environment's full state, RNG included.
class RewindToken {
 public:
  RewindToken() = default;
  RewindToken(std::string kind, std::any state) : kind_(std::move(kind)), state_(std::move(state)) {}
  const std::string& kind() const { return kind_; }
  const std::any& state() const { return state_; }
  bool empty() const { return !state_.has_value(); }

 private:
  std::string kind_;
  std::any state_;
};

/// Episodic environment that can be rewound. Stepping after done/truncated
/// without reset() is a ContractError.
class Environment {
 public:
  virtual ~Environment() = default;

  virtual std::string name() const = 0;
  virtual int obs_dim() const = 0;
  virtual ActionSpace action_space() const = 0;

  virtual std::vector<double> reset() = 0;
  virtual StepResult step(const Action& action) = 0;
  virtual std::vector<double> observation() const = 0;
  virtual bool needs_reset() const = 0;

  virtual RewindToken snapshot() const = 0;
  /// ContractError when the token came from a different environment type.
  virtual void restore(const RewindToken& token) = 0;

  /// Whether an observation lies in the terminal region; used to stop
  /// model-simulated rollouts. Environments without terminal states return false.
  virtual bool is_terminal_state(std::span<const double> /*state*/) const { return false; }

  /// Continuing environments have no natural episode end.
  virtual int episode_cap() const = 0;

  virtual void seed(std::uint64_t seed) = 0;
  virtual std::unique_ptr<Environment> clone() const = 0;
};

/// step() packaged with the pre-step observation.
Transition step_transition(Environment& env, const Action& action);

std::unique_ptr<Environment> make_environment(const std::string& name, std::uint64_t seed);

}  // namespace pgvlab::envs
