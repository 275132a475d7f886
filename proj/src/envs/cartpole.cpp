#include "envs/cartpole.hpp"

#include "common/error.hpp"

#include <cmath>

namespace pgvlab::envs {

CartPole::CartPole(std::uint64_t seed) : rng_(seed) {}

std::vector<double> CartPole::reset() {
  for (double& v : state_) v = rng_.uniform(-0.05, 0.05);
  steps_ = 0;
  needs_reset_ = false;
  return observation();
}

std::vector<double> CartPole::observation() const { return {state_.begin(), state_.end()}; }

bool CartPole::is_terminal_state(std::span<const double> s) const {
  return std::abs(s[0]) > kXLimit || std::abs(s[2]) > kThetaLimit;
}

StepResult CartPole::step(const Action& action) {
  if (needs_reset_) throw ContractError("CartPole::step called on a finished episode; reset() first");
  require(action.index == 0 || action.index == 1, "CartPole: action must be 0 or 1");

  auto [x, x_dot, theta, theta_dot] = state_;
  const double force = action.index == 1 ? kForce : -kForce;
  const double total_mass = kCartMass + kPoleMass;
  const double pole_ml = kPoleMass * kHalfLength;
  const double cos_t = std::cos(theta);
  const double sin_t = std::sin(theta);
  const double temp = (force + pole_ml * theta_dot * theta_dot * sin_t) / total_mass;
  const double theta_acc =
      (kGravity * sin_t - cos_t * temp) / (kHalfLength * (4.0 / 3.0 - kPoleMass * cos_t * cos_t / total_mass));
  const double x_acc = temp - pole_ml * theta_acc * cos_t / total_mass;

  x += kDt * x_dot;
  x_dot += kDt * x_acc;
  theta += kDt * theta_dot;
  theta_dot += kDt * theta_acc;
  state_ = {x, x_dot, theta, theta_dot};
  ++steps_;

  StepResult r;
  r.next_state = observation();
  r.reward = 1.0;
  r.done = is_terminal_state(r.next_state);
  r.truncated = !r.done && steps_ >= kMaxSteps;
  needs_reset_ = r.done || r.truncated;
  return r;
}

RewindToken CartPole::snapshot() const {
  return RewindToken("cartpole", Snapshot{state_, steps_, needs_reset_, rng_});
}

void CartPole::restore(const RewindToken& token) {
  const auto* snap = std::any_cast<Snapshot>(&token.state());
  if (token.kind() != "cartpole" || snap == nullptr) throw ContractError("CartPole::restore: foreign token");
  state_ = snap->state;
  steps_ = snap->steps;
  needs_reset_ = snap->needs_reset;
  rng_ = snap->rng;
}

}  // namespace pgvlab::envs
