#include "envs/point_mass.hpp"

#include "common/error.hpp"

#include <algorithm>
#include <cmath>

namespace pgvlab::envs {

PointMass::PointMass(std::uint64_t seed, bool clip_arena) : clip_arena_(clip_arena), rng_(seed) {}

std::vector<double> PointMass::reset() {
  state_ = {rng_.uniform(-1.0, 1.0), rng_.uniform(-1.0, 1.0), 0.0, 0.0};
  steps_ = 0;
  needs_reset_ = false;
  return observation();
}

std::vector<double> PointMass::observation() const { return {state_.begin(), state_.end()}; }

StepResult PointMass::step(const Action& action) {
  if (needs_reset_) throw ContractError("PointMass::step called on a finished episode; reset() first");
  require_shape(action.values.size() == 2, "PointMass: action must have 2 components");
  for (int i = 0; i < 2; ++i) {
    const double a = std::clamp(action.values[static_cast<std::size_t>(i)], -1.0, 1.0);
    double& p = state_[static_cast<std::size_t>(i)];
    double& v = state_[static_cast<std::size_t>(i + 2)];
    v += kDt * (a - kFriction * v);
    p += kDt * v;
    if (clip_arena_ && std::abs(p) > kArena) {
      p = std::clamp(p, -kArena, kArena);
      v = 0.0;
    }
  }
  ++steps_;
  StepResult r;
  r.next_state = observation();
  r.reward = 1.0 - std::tanh(std::hypot(state_[0], state_[1]));
  r.done = false;
  r.truncated = steps_ >= kMaxSteps;
  needs_reset_ = r.truncated;
  return r;
}

RewindToken PointMass::snapshot() const {
  return RewindToken("pointmass", Snapshot{state_, steps_, needs_reset_, rng_});
}

void PointMass::restore(const RewindToken& token) {
  const auto* snap = std::any_cast<Snapshot>(&token.state());
  if (token.kind() != "pointmass" || snap == nullptr) throw ContractError("PointMass::restore: foreign token");
  state_ = snap->state;
  steps_ = snap->steps;
  needs_reset_ = snap->needs_reset;
  rng_ = snap->rng;
}

}  // namespace pgvlab::envs
