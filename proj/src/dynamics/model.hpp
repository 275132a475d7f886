#pragma once

#include "common/rng.hpp"
#include "dynamics/replay_buffer.hpp"
#include "envs/environment.hpp"
#include "ndiff/adam.hpp"
#include "ndiff/mlp.hpp"

#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace pgvlab::dynamics {

using envs::Action;
using ndiff::Matrix;

struct ModelStep {
  Matrix next_obs;
  std::vector<double> reward;
};

/// One-step world model over batches of (observation, action) rows.
class WorldModel {
 public:
  virtual ~WorldModel() = default;
  virtual ModelStep step(const Matrix& obs, std::span<const Action> actions, Rng& rng) const = 0;
  /// Whether a predicted observation ends the episode.
  virtual bool terminal(std::span<const double> /*obs*/) const { return false; }
};

/// Ground-truth model given as a per-row step function (for oracle checks).
class OracleModel final : public WorldModel {
 public:
  using StepFn = std::function<std::pair<std::vector<double>, double>(std::span<const double>, const Action&, Rng&)>;
  using TerminalFn = std::function<bool(std::span<const double>)>;

  explicit OracleModel(StepFn fn, TerminalFn terminal = nullptr)
      : fn_(std::move(fn)), terminal_(std::move(terminal)) {}
  ModelStep step(const Matrix& obs, std::span<const Action> actions, Rng& rng) const override;
  bool terminal(std::span<const double> obs) const override { return terminal_ && terminal_(obs); }

 private:
  StepFn fn_;
  TerminalFn terminal_;
};

struct DynamicsConfig {
  std::vector<int> hidden = {64, 64};
  ndiff::Activation activation = ndiff::Activation::relu;
  ndiff::AdamConfig adam{3e-4, 0.9, 0.999, 1e-5};
};

/// Per-feature affine normalization (x - mean) / std.
struct Normalizer {
  Eigen::RowVectorXd mean;
  Eigen::RowVectorXd std;

  Matrix apply(const Matrix& x) const;
  Matrix invert(const Matrix& z) const;
};

/// Learned transition and reward networks. The transition network predicts the
/// normalized state delta s' - s and the reward network the normalized reward;
/// both read normalized (observation, encoded action) inputs.
class DynamicsModel final : public WorldModel {
 public:
  DynamicsModel() = default;
  DynamicsModel(int obs_dim, envs::ActionSpace space, DynamicsConfig config = {});

  void init(Rng& rng);
  /// Recomputes input and delta statistics from the buffer contents.
  void fit_normalizers(const ReplayBuffer& buffer);
  void set_terminal(std::function<bool(std::span<const double>)> fn) { terminal_ = std::move(fn); }

  ModelStep step(const Matrix& obs, std::span<const Action> actions, Rng& rng) const override;
  ModelStep predict(const Matrix& obs, std::span<const Action> actions) const;
  bool terminal(std::span<const double> obs) const override { return terminal_ && terminal_(obs); }

  int obs_dim() const { return obs_dim_; }
  const envs::ActionSpace& action_space() const { return space_; }
  const DynamicsConfig& config() const { return config_; }
  ndiff::ParamVector& transition_params() { return trans_params_; }
  ndiff::ParamVector& reward_params() { return reward_params_; }
  const ndiff::ParamVector& transition_params() const { return trans_params_; }
  const ndiff::ParamVector& reward_params() const { return reward_params_; }
  const Normalizer& input_norm() const { return input_norm_; }
  const Normalizer& delta_norm() const { return delta_norm_; }
  const Normalizer& reward_norm() const { return reward_norm_; }

  /// Normalized inputs for a batch of rows.
  Matrix features(const Matrix& obs, std::span<const Action> actions) const;

  void save(std::ostream& out) const;
  /// Loads into a model constructed with the same dimensions and config.
  void load(std::istream& in);
  void save(const std::string& path) const;
  void load(const std::string& path);

 private:
  friend struct DynamicsTrainer;

  int obs_dim_ = 0;
  envs::ActionSpace space_;
  DynamicsConfig config_;
  ndiff::ParamVector trans_params_;
  ndiff::ParamVector reward_params_;
  ndiff::Mlp trans_net_;
  ndiff::Mlp reward_net_;
  Normalizer input_norm_;
  Normalizer delta_norm_;
  Normalizer reward_norm_;
  std::function<bool(std::span<const double>)> terminal_;
};

struct DynamicsLosses {
  double transition = 0.0;  // MSE of the normalized delta
  double reward = 0.0;      // normalized during training, raw in evaluate_dynamics
};

struct DynamicsOptimizer {
  ndiff::AdamState transition;
  ndiff::AdamState reward;
};

/// `steps` Adam updates of both networks on minibatches drawn uniformly from the
/// buffer. Normalizers are refit first. NumericError on a non-finite loss.
DynamicsLosses train_dynamics(DynamicsModel& model, DynamicsOptimizer& opt, const ReplayBuffer& buffer, int steps,
                              int batch_size, Rng& rng);

/// Mean squared error of predicted next observations (raw units) and rewards.
DynamicsLosses evaluate_dynamics(const DynamicsModel& model, std::span<const envs::Transition> data);

// Checkpoint byte layout (little-endian): char[8] "PGVDYNMD", uint32 version (1),
// uint32 obs_dim, uint32 encoded action dim, then six normalizer vectors as
// uint32 length + float64 values (input mean/std, delta mean/std, reward mean/std),
// then the transition and reward parameter blocks (ndiff/checkpoint.hpp).
inline constexpr std::uint32_t kDynamicsFormatVersion = 1;

}  // namespace pgvlab::dynamics
