#pragma once

#include "common/rng.hpp"
#include "envs/environment.hpp"
#include "ndiff/mlp.hpp"
#include "ndiff/param_vector.hpp"
#include "ndiff/tape.hpp"

#include <span>
#include <vector>

namespace pgvlab::spg {

using ndiff::Matrix;
using ndiff::ParamVector;
using envs::Action;

struct PolicySpec {
  int obs_dim = 1;
  envs::ActionSpace space;
  std::vector<int> hidden = {64, 64};
  ndiff::Activation activation = ndiff::Activation::tanh;
  bool bias = true;
  double init_log_std = -0.5;
};

inline constexpr double kMinLogStd = -5.0;
inline constexpr double kMaxLogStd = 2.0;

/// Softmax-of-table policy: one logit per (state, action) on one-hot observations.
PolicySpec tabular_policy_spec(int n_states, int n_actions);

/// Categorical policy over logits, or a Gaussian with a state-independent
/// log-std (clamped to [-5, 2]) for continuous action spaces. Continuous samples
/// are not clipped here; environments clip on their side and log-probabilities
/// refer to the raw sample.
class Policy {
 public:
  Policy() = default;
  explicit Policy(PolicySpec spec);

  const PolicySpec& spec() const { return spec_; }
  bool discrete() const { return spec_.space.discrete; }
  ParamVector& params() { return params_; }
  const ParamVector& params() const { return params_; }

  /// Orthogonal hidden layers, output layer gain 0.01.
  void init(Rng& rng);

  /// Logits (discrete) or means (continuous), one row per observation.
  Matrix head(const Matrix& obs) const;
  Matrix head(const ParamVector& params, const Matrix& obs) const;

  Action sample(std::span<const double> obs, Rng& rng) const;
  std::vector<Action> sample_batch(const Matrix& obs, Rng& rng) const;
  /// Most likely action (argmax or the mean).
  Action mode(std::span<const double> obs) const;

  double log_prob(std::span<const double> obs, const Action& action) const;
  std::vector<double> log_prob_batch(const Matrix& obs, std::span<const Action> actions) const;

  /// Records log pi(a_r | s_r) for every row; the result is R x 1.
  ndiff::Var log_prob(ndiff::Tape& tape, const ParamVector& params, const Matrix& obs,
                      std::span<const Action> actions) const;

  ParamVector grad_log_prob(std::span<const double> obs, const Action& action) const;

  /// Action probabilities at one observation (discrete only).
  std::vector<double> probabilities(std::span<const double> obs) const;

 private:
  PolicySpec spec_;
  ParamVector params_;
  ndiff::Mlp net_;
  std::size_t log_std_segment_ = 0;
};

/// State-value network V(s).
class Critic {
 public:
  Critic() = default;
  Critic(int obs_dim, std::vector<int> hidden, ndiff::Activation activation = ndiff::Activation::tanh);

  ParamVector& params() { return params_; }
  const ParamVector& params() const { return params_; }
  const ndiff::Mlp& net() const { return net_; }

  void init(Rng& rng);
  double value(std::span<const double> obs) const;
  std::vector<double> values(const Matrix& obs) const;
  ndiff::Var forward(ndiff::Tape& tape, const ParamVector& params, const Matrix& obs) const;

 private:
  ParamVector params_;
  ndiff::Mlp net_;
};

/// Rows of a matrix built from observation vectors of equal length.
Matrix stack_rows(std::span<const std::vector<double>> rows);
Matrix single_row(std::span<const double> row);

}  // namespace pgvlab::spg
