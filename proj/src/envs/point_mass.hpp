#pragma once

#include "envs/environment.hpp"

#include <array>

namespace pgvlab::envs {

/// 2-D point mass pushed toward the origin. State (px, py, vx, vy); action is a
/// force in [-1, 1]^2; reward 1 - tanh(|p'|); 250-step episodes with no terminal
/// state. Dynamics are linear; the arena wall (|p_i| <= 2, velocity zeroed on
/// contact) is the only nonlinearity and can be disabled.
class PointMass final : public Environment {
 public:
  static constexpr double kDt = 0.1;
  static constexpr double kFriction = 0.5;
  static constexpr double kArena = 2.0;
  static constexpr int kMaxSteps = 250;

  explicit PointMass(std::uint64_t seed = 0, bool clip_arena = true);

  std::string name() const override { return "pointmass"; }
  int obs_dim() const override { return 4; }
  ActionSpace action_space() const override { return ActionSpace{false, 0, 2, -1.0, 1.0}; }

  std::vector<double> reset() override;
  StepResult step(const Action& action) override;
  std::vector<double> observation() const override;
  bool needs_reset() const override { return needs_reset_; }

  RewindToken snapshot() const override;
  void restore(const RewindToken& token) override;
  int episode_cap() const override { return kMaxSteps; }
  void seed(std::uint64_t seed) override { rng_ = Rng(seed); }
  std::unique_ptr<Environment> clone() const override { return std::make_unique<PointMass>(*this); }

  void set_state(const std::array<double, 4>& s) { state_ = s; }

 private:
  struct Snapshot {
    std::array<double, 4> state;
    int steps;
    bool needs_reset;
    Rng rng;
  };

  std::array<double, 4> state_{};
  int steps_ = 0;
  bool needs_reset_ = true;
  bool clip_arena_ = true;
  Rng rng_;
};

}  // namespace pgvlab::envs
