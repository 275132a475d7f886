#pragma once

#include "envs/environment.hpp"

#include <array>

namespace pgvlab::envs {

/// Pole balancing on a cart: 4-dim state (x, x_dot, theta, theta_dot), two push
/// actions, +1 per step, Euler integration at dt = 0.02, 200-step cap.
class CartPole final : public Environment {
 public:
  static constexpr double kGravity = 9.8;
  static constexpr double kCartMass = 1.0;
  static constexpr double kPoleMass = 0.1;
  static constexpr double kHalfLength = 0.5;
  static constexpr double kForce = 10.0;
  static constexpr double kDt = 0.02;
  static constexpr double kThetaLimit = 12.0 * 2.0 * 3.14159265358979323846 / 360.0;
  static constexpr double kXLimit = 2.4;
  static constexpr int kMaxSteps = 200;

  explicit CartPole(std::uint64_t seed = 0);

  std::string name() const override { return "cartpole"; }
  int obs_dim() const override { return 4; }
  ActionSpace action_space() const override { return ActionSpace{true, 2, 0, 0.0, 0.0}; }

  std::vector<double> reset() override;
  StepResult step(const Action& action) override;
  std::vector<double> observation() const override;
  bool needs_reset() const override { return needs_reset_; }

  RewindToken snapshot() const override;
  void restore(const RewindToken& token) override;
  bool is_terminal_state(std::span<const double> state) const override;
  int episode_cap() const override { return kMaxSteps; }
  void seed(std::uint64_t seed) override { rng_ = Rng(seed); }
  std::unique_ptr<Environment> clone() const override { return std::make_unique<CartPole>(*this); }

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
  Rng rng_;
};

}  // namespace pgvlab::envs
