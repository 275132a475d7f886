#include "envs/environment.hpp"

#include "common/error.hpp"
#include "envs/cartpole.hpp"
#include "envs/point_mass.hpp"

#include <algorithm>

namespace pgvlab::envs {

void encode_action(const ActionSpace& space, const Action& a, std::span<double> out) {
  require_shape(static_cast<int>(out.size()) == space.encoded_dim(), "encode_action: output width mismatch");
  if (space.discrete) {
    require(a.index >= 0 && a.index < space.n, "encode_action: discrete action out of range");
    std::fill(out.begin(), out.end(), 0.0);
    out[static_cast<std::size_t>(a.index)] = 1.0;
  } else {
    require_shape(static_cast<int>(a.values.size()) == space.dim, "encode_action: continuous action width mismatch");
    std::copy(a.values.begin(), a.values.end(), out.begin());
  }
}

Transition step_transition(Environment& env, const Action& action) {
  Transition t;
  t.state = env.observation();
  t.action = action;
  StepResult r = env.step(action);
  t.reward = r.reward;
  t.next_state = std::move(r.next_state);
  t.done = r.done;
  t.truncated = r.truncated;
  return t;
}

std::unique_ptr<Environment> make_environment(const std::string& name, std::uint64_t seed) {
  if (name == "cartpole") return std::make_unique<CartPole>(seed);
  if (name == "pointmass") return std::make_unique<PointMass>(seed);
  throw ContractError("unknown environment '" + name + "' (expected cartpole or pointmass)");
}

}  // namespace pgvlab::envs
