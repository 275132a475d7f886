#include "agents/q_networks.hpp"

#include "common/error.hpp"

#include <cmath>
#include <numeric>

namespace pgvlab::agents {

QNetworks::QNetworks(int obs_dim, envs::ActionSpace space, std::vector<int> hidden, ndiff::AdamConfig adam)
    : obs_dim_(obs_dim), space_(space), adam_(adam) {
  const int in = obs_dim + space.encoded_dim();
  for (int i = 0; i < 2; ++i)
    nets_[static_cast<std::size_t>(i)] = ndiff::Mlp(ndiff::MlpSpec{in, hidden, 1, ndiff::Activation::tanh, true},
                                                    params_[static_cast<std::size_t>(i)], "q" + std::to_string(i) + ".");
}

void QNetworks::init(Rng& rng) {
  for (std::size_t i = 0; i < 2; ++i) {
    nets_[i].init_orthogonal(params_[i], rng, 0.01);
    opt_[i] = {};
  }
}

Matrix QNetworks::inputs(const Matrix& obs, std::span<const Action> actions) const {
  require_shape(obs.cols() == obs_dim_, "QNetworks: observation width");
  require_shape(static_cast<std::size_t>(obs.rows()) == actions.size(), "QNetworks: row count mismatch");
  const int ad = space_.encoded_dim();
  Matrix x(obs.rows(), obs_dim_ + ad);
  x.leftCols(obs_dim_) = obs;
  std::vector<double> enc(static_cast<std::size_t>(ad));
  for (Eigen::Index r = 0; r < obs.rows(); ++r) {
    envs::encode_action(space_, actions[static_cast<std::size_t>(r)], enc);
    for (int c = 0; c < ad; ++c) x(r, obs_dim_ + c) = enc[static_cast<std::size_t>(c)];
  }
  return x;
}

std::array<std::vector<double>, 2> QNetworks::predict(const Matrix& obs, std::span<const Action> actions) const {
  const Matrix x = inputs(obs, actions);
  std::array<std::vector<double>, 2> out;
  for (std::size_t i = 0; i < 2; ++i) {
    const Matrix y = nets_[i].forward(params_[i], x);
    out[i].resize(static_cast<std::size_t>(y.rows()));
    for (Eigen::Index r = 0; r < y.rows(); ++r) out[i][static_cast<std::size_t>(r)] = target_mean_ + target_std_ * y(r, 0);
  }
  return out;
}

std::vector<double> QNetworks::min_q(const Matrix& obs, std::span<const Action> actions) const {
  auto p = predict(obs, actions);
  for (std::size_t r = 0; r < p[0].size(); ++r) p[0][r] = std::min(p[0][r], p[1][r]);
  return p[0];
}

double QNetworks::train(const Matrix& obs, std::span<const Action> actions, std::span<const double> targets,
                        int epochs, int minibatch, Rng& rng) {
  require_shape(targets.size() == actions.size(), "QNetworks::train: target count");
  require(!targets.empty() && minibatch >= 1, "QNetworks::train: empty data");
  const auto n = targets.size();
  const double mean = std::accumulate(targets.begin(), targets.end(), 0.0) / static_cast<double>(n);
  double var = 0.0;
  for (double t : targets) var += (t - mean) * (t - mean);
  const double sd = std::sqrt(var / static_cast<double>(n));
  target_mean_ = mean;
  target_std_ = sd > 1e-6 ? sd : 1.0;

  const Matrix x = inputs(obs, actions);
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  double last = 0.0;
  for (int e = 0; e < epochs; ++e) {
    rng.shuffle(order.begin(), order.end());
    double acc = 0.0;
    int count = 0;
    for (std::size_t start = 0; start < n; start += static_cast<std::size_t>(minibatch)) {
      const std::size_t end = std::min(n, start + static_cast<std::size_t>(minibatch));
      Matrix xb(static_cast<Eigen::Index>(end - start), x.cols());
      Matrix yb(xb.rows(), 1);
      for (std::size_t k = start; k < end; ++k) {
        xb.row(static_cast<Eigen::Index>(k - start)) = x.row(static_cast<Eigen::Index>(order[k]));
        yb(static_cast<Eigen::Index>(k - start), 0) = (targets[order[k]] - target_mean_) / target_std_;
      }
      for (std::size_t i = 0; i < 2; ++i) {
        ndiff::Tape tape;
        const auto pred = nets_[i].forward(tape, params_[i], tape.constant(xb));
        const auto loss = ndiff::mean(ndiff::square(pred - tape.constant(yb)));
        const double l = tape.scalar(loss);
        if (!std::isfinite(l)) throw NumericError("QNetworks::train: non-finite loss");
        tape.backward(loss);
        ndiff::adam_step(params_[i], tape.gradient(params_[i]), opt_[i], adam_);
        acc += l;
        ++count;
      }
    }
    last = acc / count;
  }
  return last;
}

}  // namespace pgvlab::agents
