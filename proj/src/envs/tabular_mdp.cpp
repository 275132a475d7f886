#include "envs/tabular_mdp.hpp"

#include "common/error.hpp"
#include "common/rng.hpp"

#include <cmath>
#include <string>

namespace pgvlab::envs {

void TabularMDP::validate() const {
  require(n_states >= 1 && n_states <= kMaxTabularSize && n_actions >= 1 && n_actions <= kMaxTabularSize,
          "TabularMDP: state/action counts out of range");
  require(gamma > 0.0 && gamma <= 1.0, "TabularMDP: gamma must lie in (0, 1]");
  require(reward.rows() == n_states && reward.cols() == n_actions, "TabularMDP: reward must be S x A");
  require(static_cast<int>(kernel.size()) == n_states, "TabularMDP: kernel needs one block per state");
  for (const auto& block : kernel) {
    require(block.rows() == n_actions && block.cols() == n_states, "TabularMDP: kernel block must be A x S");
    require(block.minCoeff() >= 0.0, "TabularMDP: negative transition probability");
    for (int a = 0; a < n_actions; ++a) {
      require(std::abs(block.row(a).sum() - 1.0) <= 1e-12, "TabularMDP: kernel row does not sum to 1");
    }
  }
  require(init_dist.size() == n_states && std::abs(init_dist.sum() - 1.0) <= 1e-12,
          "TabularMDP: init_dist must be a simplex vector");
}

TabularMDP generate_random_mdp(std::uint64_t seed, int n_states, int n_actions, double reward_scale, double mixing,
                               double gamma) {
  require(n_states >= 2 && n_states <= kMaxTabularSize, "generate_random_mdp: S must be in [2, 64]");
  require(n_actions >= 2 && n_actions <= kMaxTabularSize, "generate_random_mdp: A must be in [2, 64]");
  require(mixing >= 0.0 && mixing <= 1.0, "generate_random_mdp: mixing must be in [0, 1]");
  Rng rng(seed);
  TabularMDP mdp;
  mdp.n_states = n_states;
  mdp.n_actions = n_actions;
  mdp.gamma = gamma;
  mdp.reward.resize(n_states, n_actions);
  for (int s = 0; s < n_states; ++s)
    for (int a = 0; a < n_actions; ++a) mdp.reward(s, a) = rng.uniform(-reward_scale, reward_scale);

  const double floor = (1.0 - mixing) / n_states;
  mdp.kernel.assign(static_cast<std::size_t>(n_states), Eigen::MatrixXd(n_actions, n_states));
  for (int s = 0; s < n_states; ++s) {
    for (int a = 0; a < n_actions; ++a) {
      Eigen::VectorXd draw(n_states);
      for (int k = 0; k < n_states; ++k) {
        double u = rng.uniform();
        while (u <= 0.0) u = rng.uniform();
        draw(k) = -std::log(u);
      }
      draw /= draw.sum();
      Eigen::RowVectorXd row = (floor + mixing * draw.array()).matrix().transpose();
      row /= row.sum();
      mdp.kernel[static_cast<std::size_t>(s)].row(a) = row;
    }
  }
  mdp.init_dist = Eigen::VectorXd::Constant(n_states, 1.0 / n_states);
  mdp.validate();
  return mdp;
}

TabularPolicy softmax_policy(const Eigen::MatrixXd& logits) {
  TabularPolicy pi(logits.rows(), logits.cols());
  for (Eigen::Index s = 0; s < logits.rows(); ++s) {
    const double m = logits.row(s).maxCoeff();
    Eigen::RowVectorXd e = (logits.row(s).array() - m).exp().matrix();
    pi.row(s) = e / e.sum();
  }
  return pi;
}

TabularPolicy uniform_policy(const TabularMDP& mdp) {
  return TabularPolicy::Constant(mdp.n_states, mdp.n_actions, 1.0 / mdp.n_actions);
}

void validate_policy(const TabularMDP& mdp, const TabularPolicy& policy) {
  require(policy.rows() == mdp.n_states && policy.cols() == mdp.n_actions, "policy must be S x A");
  for (int s = 0; s < mdp.n_states; ++s) {
    require(policy.row(s).minCoeff() >= 0.0 && std::abs(policy.row(s).sum() - 1.0) <= 1e-10,
            "policy row " + std::to_string(s) + " is not a probability vector");
  }
}

Eigen::MatrixXd marginal_kernel(const TabularMDP& mdp, const TabularPolicy& policy) {
  validate_policy(mdp, policy);
  Eigen::MatrixXd k(mdp.n_states, mdp.n_states);
  for (int s = 0; s < mdp.n_states; ++s) k.row(s) = policy.row(s) * mdp.kernel[static_cast<std::size_t>(s)];
  return k;
}

Eigen::VectorXd stationary_distribution(const TabularMDP& mdp, const TabularPolicy& policy, int max_iterations) {
  const Eigen::MatrixXd k = marginal_kernel(mdp, policy);
  Eigen::RowVectorXd p = mdp.init_dist.transpose();
  for (int it = 0; it < max_iterations; ++it) {
    Eigen::RowVectorXd next = p * k;
    next /= next.sum();
    const double change = (next - p).cwiseAbs().maxCoeff();
    p = next;
    if (change <= 1e-15) return p.transpose();
  }
  throw NumericError("stationary_distribution: power iteration did not converge");
}

Eigen::MatrixXd t_step_kernel(const TabularMDP& mdp, const TabularPolicy& policy, int t) {
  require(t >= 0, "t_step_kernel: t must be >= 0");
  const Eigen::MatrixXd k = marginal_kernel(mdp, policy);
  Eigen::MatrixXd out = Eigen::MatrixXd::Identity(mdp.n_states, mdp.n_states);
  for (int i = 0; i < t; ++i) out = out * k;
  return out;
}

PolicyValues evaluate_policy(const TabularMDP& mdp, const TabularPolicy& policy) {
  require(mdp.gamma < 1.0, "evaluate_policy: discounted values need gamma < 1");
  const Eigen::MatrixXd k = marginal_kernel(mdp, policy);
  Eigen::VectorXd r_pi(mdp.n_states);
  for (int s = 0; s < mdp.n_states; ++s) r_pi(s) = policy.row(s).dot(mdp.reward.row(s));
  const Eigen::MatrixXd system = Eigen::MatrixXd::Identity(mdp.n_states, mdp.n_states) - mdp.gamma * k;
  PolicyValues out;
  out.v = system.partialPivLu().solve(r_pi);
  out.q.resize(mdp.n_states, mdp.n_actions);
  for (int s = 0; s < mdp.n_states; ++s) {
    out.q.row(s) = mdp.reward.row(s) + mdp.gamma * (mdp.kernel[static_cast<std::size_t>(s)] * out.v).transpose();
  }
  return out;
}

}  // namespace pgvlab::envs
