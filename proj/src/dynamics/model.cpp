#include "dynamics/model.hpp"

#include "common/error.hpp"
#include "ndiff/checkpoint.hpp"

#include <cmath>
#include <cstring>
#include <fstream>

namespace pgvlab::dynamics {

using ndiff::Tape;
using ndiff::Var;

ModelStep OracleModel::step(const Matrix& obs, std::span<const Action> actions, Rng& rng) const {
  require_shape(static_cast<std::size_t>(obs.rows()) == actions.size(), "OracleModel: row count mismatch");
  ModelStep out;
  out.next_obs.resize(obs.rows(), obs.cols());
  out.reward.resize(actions.size());
  for (Eigen::Index r = 0; r < obs.rows(); ++r) {
    auto [next, reward] = fn_(std::span<const double>(obs.row(r).data(), static_cast<std::size_t>(obs.cols())),
                              actions[static_cast<std::size_t>(r)], rng);
    require_shape(static_cast<Eigen::Index>(next.size()) == obs.cols(), "OracleModel: next state width");
    for (Eigen::Index c = 0; c < obs.cols(); ++c) out.next_obs(r, c) = next[static_cast<std::size_t>(c)];
    out.reward[static_cast<std::size_t>(r)] = reward;
  }
  return out;
}

Matrix Normalizer::apply(const Matrix& x) const {
  return ((x.rowwise() - mean).array().rowwise() / std.array()).matrix();
}

Matrix Normalizer::invert(const Matrix& z) const {
  return ((z.array().rowwise() * std.array()).rowwise() + mean.array()).matrix();
}

namespace {

Normalizer identity_normalizer(int dim) {
  return Normalizer{Eigen::RowVectorXd::Zero(dim), Eigen::RowVectorXd::Ones(dim)};
}

Normalizer fit(const Matrix& x) {
  Normalizer n;
  n.mean = x.colwise().mean();
  const Matrix centered = x.rowwise() - n.mean;
  n.std = (centered.array().square().colwise().mean()).sqrt().matrix();
  for (Eigen::Index i = 0; i < n.std.size(); ++i)
    if (!(n.std(i) > 1e-6)) n.std(i) = 1.0;
  return n;
}

void write_vec(std::ostream& out, const Eigen::RowVectorXd& v) {
  ndiff::write_u32(out, static_cast<std::uint32_t>(v.size()));
  for (Eigen::Index i = 0; i < v.size(); ++i) ndiff::write_f64(out, v(i));
}

Eigen::RowVectorXd read_vec(std::istream& in, Eigen::Index expected) {
  const auto n = ndiff::read_u32(in);
  if (n != expected) throw IoError("dynamics checkpoint: normalizer length mismatch");
  Eigen::RowVectorXd v(n);
  for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = ndiff::read_f64(in);
  return v;
}

constexpr char kMagic[8] = {'P', 'G', 'V', 'D', 'Y', 'N', 'M', 'D'};

}  // namespace

DynamicsModel::DynamicsModel(int obs_dim, envs::ActionSpace space, DynamicsConfig config)
    : obs_dim_(obs_dim), space_(space), config_(std::move(config)) {
  require_shape(obs_dim >= 1 && space.encoded_dim() >= 1, "DynamicsModel: empty observation or action space");
  const int in = obs_dim + space.encoded_dim();
  trans_net_ = ndiff::Mlp(ndiff::MlpSpec{in, config_.hidden, obs_dim, config_.activation, true}, trans_params_, "dyn.");
  reward_net_ = ndiff::Mlp(ndiff::MlpSpec{in, config_.hidden, 1, config_.activation, true}, reward_params_, "rew.");
  input_norm_ = identity_normalizer(in);
  delta_norm_ = identity_normalizer(obs_dim);
  reward_norm_ = identity_normalizer(1);
}

void DynamicsModel::init(Rng& rng) {
  trans_net_.init_orthogonal(trans_params_, rng, 1.0);
  reward_net_.init_orthogonal(reward_params_, rng, 0.01);
}

Matrix DynamicsModel::features(const Matrix& obs, std::span<const Action> actions) const {
  require_shape(obs.cols() == obs_dim_, "DynamicsModel: observation width");
  require_shape(static_cast<std::size_t>(obs.rows()) == actions.size(), "DynamicsModel: row count mismatch");
  const int ad = space_.encoded_dim();
  Matrix x(obs.rows(), obs_dim_ + ad);
  x.leftCols(obs_dim_) = obs;
  std::vector<double> enc(static_cast<std::size_t>(ad));
  for (Eigen::Index r = 0; r < obs.rows(); ++r) {
    envs::encode_action(space_, actions[static_cast<std::size_t>(r)], enc);
    for (int c = 0; c < ad; ++c) x(r, obs_dim_ + c) = enc[static_cast<std::size_t>(c)];
  }
  return input_norm_.apply(x);
}

void DynamicsModel::fit_normalizers(const ReplayBuffer& buffer) {
  require(!buffer.empty(), "DynamicsModel::fit_normalizers: empty buffer");
  const auto n = static_cast<Eigen::Index>(buffer.size());
  const int ad = space_.encoded_dim();
  Matrix x(n, obs_dim_ + ad);
  Matrix delta(n, obs_dim_);
  Matrix reward(n, 1);
  std::vector<double> enc(static_cast<std::size_t>(ad));
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& t = buffer.at(static_cast<std::size_t>(i));
    envs::encode_action(space_, t.action, enc);
    reward(i, 0) = t.reward;
    for (int c = 0; c < obs_dim_; ++c) {
      x(i, c) = t.state[static_cast<std::size_t>(c)];
      delta(i, c) = t.next_state[static_cast<std::size_t>(c)] - t.state[static_cast<std::size_t>(c)];
    }
    for (int c = 0; c < ad; ++c) x(i, obs_dim_ + c) = enc[static_cast<std::size_t>(c)];
  }
  input_norm_ = fit(x);
  delta_norm_ = fit(delta);
  reward_norm_ = fit(reward);
}

ModelStep DynamicsModel::predict(const Matrix& obs, std::span<const Action> actions) const {
  const Matrix x = features(obs, actions);
  ModelStep out;
  out.next_obs = obs + delta_norm_.invert(trans_net_.forward(trans_params_, x));
  const Matrix r = reward_norm_.invert(reward_net_.forward(reward_params_, x));
  out.reward.assign(r.data(), r.data() + r.rows());
  return out;
}

ModelStep DynamicsModel::step(const Matrix& obs, std::span<const Action> actions, Rng& /*rng*/) const {
  return predict(obs, actions);
}

void DynamicsModel::save(std::ostream& out) const {
  out.write(kMagic, sizeof(kMagic));
  ndiff::write_u32(out, kDynamicsFormatVersion);
  ndiff::write_u32(out, static_cast<std::uint32_t>(obs_dim_));
  ndiff::write_u32(out, static_cast<std::uint32_t>(space_.encoded_dim()));
  write_vec(out, input_norm_.mean);
  write_vec(out, input_norm_.std);
  write_vec(out, delta_norm_.mean);
  write_vec(out, delta_norm_.std);
  write_vec(out, reward_norm_.mean);
  write_vec(out, reward_norm_.std);
  ndiff::write_params(out, trans_params_);
  ndiff::write_params(out, reward_params_);
}

void DynamicsModel::load(std::istream& in) {
  char magic[8];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) throw IoError("dynamics checkpoint: bad magic");
  const auto version = ndiff::read_u32(in);
  if (version != kDynamicsFormatVersion)
    throw IoError("dynamics checkpoint: unsupported version " + std::to_string(version));
  if (ndiff::read_u32(in) != static_cast<std::uint32_t>(obs_dim_) ||
      ndiff::read_u32(in) != static_cast<std::uint32_t>(space_.encoded_dim()))
    throw IoError("dynamics checkpoint: dimensions do not match this model");
  const Eigen::Index in_dim = obs_dim_ + space_.encoded_dim();
  input_norm_.mean = read_vec(in, in_dim);
  input_norm_.std = read_vec(in, in_dim);
  delta_norm_.mean = read_vec(in, obs_dim_);
  delta_norm_.std = read_vec(in, obs_dim_);
  reward_norm_.mean = read_vec(in, 1);
  reward_norm_.std = read_vec(in, 1);
  ndiff::read_params(in, trans_params_);
  ndiff::read_params(in, reward_params_);
}

void DynamicsModel::save(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  save(out);
}

void DynamicsModel::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "'");
  load(in);
}

struct DynamicsTrainer {
  static DynamicsLosses step(DynamicsModel& m, DynamicsOptimizer& opt, const Matrix& x, const Matrix& delta_target,
                             const Matrix& reward_target) {
    Tape tape;
    const Var in = tape.constant(x);
    const Var pred = m.trans_net_.forward(tape, m.trans_params_, in);
    const Var lt = ndiff::mean(ndiff::square(pred - tape.constant(delta_target)));
    const Var rp = m.reward_net_.forward(tape, m.reward_params_, in);
    const Var lr = ndiff::mean(ndiff::square(rp - tape.constant(reward_target)));
    DynamicsLosses losses{tape.scalar(lt), tape.scalar(lr)};
    if (!std::isfinite(losses.transition) || !std::isfinite(losses.reward))
      throw NumericError("train_dynamics: non-finite loss");
    tape.backward(lt + lr);
    ndiff::adam_step(m.trans_params_, tape.gradient(m.trans_params_), opt.transition, m.config_.adam);
    ndiff::adam_step(m.reward_params_, tape.gradient(m.reward_params_), opt.reward, m.config_.adam);
    return losses;
  }
};

DynamicsLosses train_dynamics(DynamicsModel& model, DynamicsOptimizer& opt, const ReplayBuffer& buffer, int steps,
                              int batch_size, Rng& rng) {
  require(!buffer.empty(), "train_dynamics: empty buffer");
  require(steps >= 0 && batch_size >= 1, "train_dynamics: steps >= 0 and batch_size >= 1 required");
  model.fit_normalizers(buffer);
  const int od = model.obs_dim();
  DynamicsLosses last;
  Matrix obs(batch_size, od);
  Matrix delta(batch_size, od);
  Matrix reward(batch_size, 1);
  std::vector<Action> actions(static_cast<std::size_t>(batch_size));
  for (int it = 0; it < steps; ++it) {
    for (int b = 0; b < batch_size; ++b) {
      const auto& t = buffer.at(rng.index(buffer.size()));
      for (int c = 0; c < od; ++c) {
        obs(b, c) = t.state[static_cast<std::size_t>(c)];
        delta(b, c) = t.next_state[static_cast<std::size_t>(c)] - t.state[static_cast<std::size_t>(c)];
      }
      reward(b, 0) = t.reward;
      actions[static_cast<std::size_t>(b)] = t.action;
    }
    last = DynamicsTrainer::step(model, opt, model.features(obs, actions), model.delta_norm().apply(delta),
                                model.reward_norm().apply(reward));
  }
  return last;
}

DynamicsLosses evaluate_dynamics(const DynamicsModel& model, std::span<const envs::Transition> data) {
  require(!data.empty(), "evaluate_dynamics: no data");
  const auto n = static_cast<Eigen::Index>(data.size());
  Matrix obs(n, model.obs_dim());
  Matrix next(n, model.obs_dim());
  std::vector<Action> actions;
  std::vector<double> rewards;
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& t = data[static_cast<std::size_t>(i)];
    for (int c = 0; c < model.obs_dim(); ++c) {
      obs(i, c) = t.state[static_cast<std::size_t>(c)];
      next(i, c) = t.next_state[static_cast<std::size_t>(c)];
    }
    actions.push_back(t.action);
    rewards.push_back(t.reward);
  }
  const ModelStep p = model.predict(obs, actions);
  DynamicsLosses out;
  out.transition = (p.next_obs - next).array().square().mean();
  double acc = 0.0;
  for (std::size_t i = 0; i < rewards.size(); ++i) acc += (p.reward[i] - rewards[i]) * (p.reward[i] - rewards[i]);
  out.reward = acc / static_cast<double>(rewards.size());
  return out;
}

}  // namespace pgvlab::dynamics
