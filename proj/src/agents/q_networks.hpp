#pragma once

#include "agents/config.hpp"
#include "dynamics/model.hpp"
#include "envs/environment.hpp"
#include "ndiff/adam.hpp"
#include "ndiff/mlp.hpp"

#include <array>
#include <span>
#include <vector>

namespace pgvlab::agents {

using envs::Action;
using ndiff::Matrix;

/// Two independently initialized Q(s, a) regressors. Targets are standardized
/// with statistics refit on every training call.
class QNetworks {
 public:
  QNetworks() = default;
  QNetworks(int obs_dim, envs::ActionSpace space, std::vector<int> hidden, ndiff::AdamConfig adam);

  void init(Rng& rng);

  std::array<std::vector<double>, 2> predict(const Matrix& obs, std::span<const Action> actions) const;
  /// Pointwise minimum of the two predictions.
  std::vector<double> min_q(const Matrix& obs, std::span<const Action> actions) const;

  /// Shuffled-minibatch MSE regression of both networks onto `targets`.
  /// Returns the mean loss of the last epoch (standardized units).
  double train(const Matrix& obs, std::span<const Action> actions, std::span<const double> targets, int epochs,
               int minibatch, Rng& rng);

  const ndiff::ParamVector& params(int i) const { return params_[static_cast<std::size_t>(i)]; }

 private:
  Matrix inputs(const Matrix& obs, std::span<const Action> actions) const;

  int obs_dim_ = 0;
  envs::ActionSpace space_;
  ndiff::AdamConfig adam_;
  std::array<ndiff::ParamVector, 2> params_;
  std::array<ndiff::Mlp, 2> nets_;
  std::array<ndiff::AdamState, 2> opt_;
  double target_mean_ = 0.0;
  double target_std_ = 1.0;
};

}  // namespace pgvlab::agents
