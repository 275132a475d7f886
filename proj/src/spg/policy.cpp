#include "spg/policy.hpp"

#include "common/error.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace pgvlab::spg {

using envs::Action;
using ndiff::Tape;
using ndiff::Var;

PolicySpec tabular_policy_spec(int n_states, int n_actions) {
  PolicySpec spec;
  spec.obs_dim = n_states;
  spec.space = envs::ActionSpace{true, n_actions, 0, 0.0, 0.0};
  spec.hidden = {};
  spec.bias = false;
  return spec;
}

Policy::Policy(PolicySpec spec) : spec_(std::move(spec)) {
  const int out = spec_.space.discrete ? spec_.space.n : spec_.space.dim;
  require_shape(out >= 1, "Policy: action space has no dimensions");
  net_ = ndiff::Mlp(ndiff::MlpSpec{spec_.obs_dim, spec_.hidden, out, spec_.activation, spec_.bias}, params_, "pi.");
  if (!spec_.space.discrete) {
    log_std_segment_ = params_.add_segment("pi.log_std", 1, spec_.space.dim);
    params_.matrix(log_std_segment_).setConstant(spec_.init_log_std);
  }
}

void Policy::init(Rng& rng) { net_.init_orthogonal(params_, rng, 0.01); }

Matrix Policy::head(const Matrix& obs) const { return net_.forward(params_, obs); }
Matrix Policy::head(const ParamVector& params, const Matrix& obs) const { return net_.forward(params, obs); }

std::vector<double> Policy::probabilities(std::span<const double> obs) const {
  require(discrete(), "Policy::probabilities: continuous policy");
  const Matrix logits = head(single_row(obs));
  const double mx = logits.maxCoeff();
  std::vector<double> p(static_cast<std::size_t>(logits.cols()));
  double total = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) total += p[i] = std::exp(logits(0, static_cast<Eigen::Index>(i)) - mx);
  for (double& x : p) x /= total;
  return p;
}

std::vector<Action> Policy::sample_batch(const Matrix& obs, Rng& rng) const {
  const Matrix h = head(obs);
  std::vector<Action> out;
  out.reserve(static_cast<std::size_t>(obs.rows()));
  if (discrete()) {
    std::vector<double> p(static_cast<std::size_t>(h.cols()));
    for (Eigen::Index r = 0; r < h.rows(); ++r) {
      const double mx = h.row(r).maxCoeff();
      for (std::size_t i = 0; i < p.size(); ++i) p[i] = std::exp(h(r, static_cast<Eigen::Index>(i)) - mx);
      out.push_back(Action::discrete(static_cast<int>(rng.categorical(p))));
    }
  } else {
    const auto log_std = params_.matrix(log_std_segment_);
    for (Eigen::Index r = 0; r < h.rows(); ++r) {
      std::vector<double> a(static_cast<std::size_t>(h.cols()));
      for (Eigen::Index d = 0; d < h.cols(); ++d)
        a[static_cast<std::size_t>(d)] = h(r, d) + std::exp(std::clamp(log_std(0, d), kMinLogStd, kMaxLogStd)) * rng.normal();
      out.push_back(Action::continuous(std::move(a)));
    }
  }
  return out;
}

Action Policy::sample(std::span<const double> obs, Rng& rng) const {
  return std::move(sample_batch(single_row(obs), rng).front());
}

Action Policy::mode(std::span<const double> obs) const {
  const Matrix h = head(single_row(obs));
  if (discrete()) {
    Eigen::Index best = 0;
    h.row(0).maxCoeff(&best);
    return Action::discrete(static_cast<int>(best));
  }
  return Action::continuous(std::vector<double>(h.data(), h.data() + h.cols()));
}

std::vector<double> Policy::log_prob_batch(const Matrix& obs, std::span<const Action> actions) const {
  require_shape(static_cast<std::size_t>(obs.rows()) == actions.size(), "Policy::log_prob_batch: row count mismatch");
  const Matrix h = head(obs);
  std::vector<double> out(actions.size());
  if (discrete()) {
    for (Eigen::Index r = 0; r < h.rows(); ++r) {
      const int a = actions[static_cast<std::size_t>(r)].index;
      require(a >= 0 && a < h.cols(), "Policy::log_prob: action outside the policy support");
      const double mx = h.row(r).maxCoeff();
      const double lse = mx + std::log((h.row(r).array() - mx).exp().sum());
      out[static_cast<std::size_t>(r)] = h(r, a) - lse;
    }
  } else {
    const auto log_std = params_.matrix(log_std_segment_);
    const double norm = 0.5 * static_cast<double>(h.cols()) * std::log(2.0 * std::numbers::pi);
    for (Eigen::Index r = 0; r < h.rows(); ++r) {
      const auto& a = actions[static_cast<std::size_t>(r)].values;
      require_shape(static_cast<Eigen::Index>(a.size()) == h.cols(), "Policy::log_prob: action width mismatch");
      double lp = -norm;
      for (Eigen::Index d = 0; d < h.cols(); ++d) {
        const double ls = std::clamp(log_std(0, d), kMinLogStd, kMaxLogStd);
        const double z = (a[static_cast<std::size_t>(d)] - h(r, d)) * std::exp(-ls);
        lp += -0.5 * z * z - ls;
      }
      out[static_cast<std::size_t>(r)] = lp;
    }
  }
  return out;
}

double Policy::log_prob(std::span<const double> obs, const Action& action) const {
  return log_prob_batch(single_row(obs), std::span<const Action>(&action, 1)).front();
}

Var Policy::log_prob(Tape& tape, const ParamVector& params, const Matrix& obs,
                     std::span<const Action> actions) const {
  require_shape(static_cast<std::size_t>(obs.rows()) == actions.size(), "Policy::log_prob: row count mismatch");
  const Var h = net_.forward(tape, params, tape.constant(obs));
  if (discrete()) {
    std::vector<int> idx(actions.size());
    for (std::size_t r = 0; r < actions.size(); ++r) {
      idx[r] = actions[r].index;
      require(idx[r] >= 0 && idx[r] < spec_.space.n, "Policy::log_prob: action outside the policy support");
    }
    return ndiff::pick(ndiff::log_softmax(h), std::move(idx));
  }
  const Eigen::Index dim = spec_.space.dim;
  Matrix a(obs.rows(), dim);
  for (Eigen::Index r = 0; r < a.rows(); ++r) {
    const auto& v = actions[static_cast<std::size_t>(r)].values;
    require_shape(static_cast<Eigen::Index>(v.size()) == dim, "Policy::log_prob: action width mismatch");
    for (Eigen::Index d = 0; d < dim; ++d) a(r, d) = v[static_cast<std::size_t>(d)];
  }
  const Var ls = ndiff::clamp(tape.param(params, log_std_segment_), kMinLogStd, kMaxLogStd);
  const Var z = (tape.constant(std::move(a)) - h) * ndiff::exp(-ls);
  const Var quad = ndiff::scale(ndiff::row_sum(ndiff::square(z)), -0.5);
  const double norm = 0.5 * static_cast<double>(dim) * std::log(2.0 * std::numbers::pi);
  return ndiff::add_scalar(quad - ndiff::sum(ls), -norm);
}

ParamVector Policy::grad_log_prob(std::span<const double> obs, const Action& action) const {
  Tape tape;
  const Var lp = log_prob(tape, params_, single_row(obs), std::span<const Action>(&action, 1));
  const double value = tape.scalar(lp);
  if (!std::isfinite(value)) throw NumericError("Policy::grad_log_prob: log-probability is not finite");
  tape.backward(lp);
  return tape.gradient(params_);
}

Critic::Critic(int obs_dim, std::vector<int> hidden, ndiff::Activation activation) {
  net_ = ndiff::Mlp(ndiff::MlpSpec{obs_dim, std::move(hidden), 1, activation, true}, params_, "v.");
}

void Critic::init(Rng& rng) { net_.init_orthogonal(params_, rng, 1.0); }

double Critic::value(std::span<const double> obs) const { return net_.forward(params_, single_row(obs))(0, 0); }

std::vector<double> Critic::values(const Matrix& obs) const {
  const Matrix v = net_.forward(params_, obs);
  return {v.data(), v.data() + v.rows()};
}

Var Critic::forward(Tape& tape, const ParamVector& params, const Matrix& obs) const {
  return net_.forward(tape, params, tape.constant(obs));
}

Matrix stack_rows(std::span<const std::vector<double>> rows) {
  require(!rows.empty(), "stack_rows: no rows");
  Matrix m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.front().size()));
  for (std::size_t r = 0; r < rows.size(); ++r) {
    require_shape(rows[r].size() == rows.front().size(), "stack_rows: ragged rows");
    for (std::size_t c = 0; c < rows[r].size(); ++c) m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows[r][c];
  }
  return m;
}

Matrix single_row(std::span<const double> row) {
  Matrix m(1, static_cast<Eigen::Index>(row.size()));
  for (std::size_t c = 0; c < row.size(); ++c) m(0, static_cast<Eigen::Index>(c)) = row[c];
  return m;
}

}  // namespace pgvlab::spg
