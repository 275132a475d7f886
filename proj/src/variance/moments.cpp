#include "variance/moments.hpp"

#include "common/error.hpp"
#include "envs/tabular_env.hpp"
#include "spg/estimator.hpp"

#include <cmath>

namespace pgvlab::variance {

namespace {

// Q(s,a) (e_{s,a} - pi(s,.)) embedded in a length S*A vector.
VectorXd score_term(int s, int a, const MatrixXd& pi, double q) {
  const int A = static_cast<int>(pi.cols());
  VectorXd v = VectorXd::Zero(pi.size());
  for (int k = 0; k < A; ++k) v(s * A + k) = q * ((k == a ? 1.0 : 0.0) - pi(s, k));
  return v;
}

}  // namespace

VectorXd Moments::lag_covariance(int t, int n) const {
  require(t >= 1 && t <= max_lag, "Moments::lag_covariance: lag out of range");
  require(n >= 1, "Moments::lag_covariance: N must be >= 1");
  return alpha_e[static_cast<std::size_t>(t)] + e_alpha[static_cast<std::size_t>(t)] / static_cast<double>(n);
}

Moments exact_moments(const envs::TabularMDP& mdp, const MatrixXd& logits, int max_lag, double weight_discount) {
  mdp.validate();
  require(max_lag >= 0, "exact_moments: max_lag must be >= 0");
  require(weight_discount > 0.0 && weight_discount <= 1.0, "exact_moments: weight discount must lie in (0, 1]");
  require_shape(logits.rows() == mdp.n_states && logits.cols() == mdp.n_actions, "exact_moments: logits shape");
  const int S = mdp.n_states;
  const int A = mdp.n_actions;
  const int P = S * A;

  Moments m;
  m.n_states = S;
  m.n_actions = A;
  m.max_lag = max_lag;
  m.weight_discount = weight_discount;
  m.policy = envs::softmax_policy(logits);
  m.stationary = envs::stationary_distribution(mdp, m.policy);
  m.q = envs::evaluate_policy(mdp, m.policy).q;

  m.upsilon.assign(static_cast<std::size_t>(S), MatrixXd::Zero(A, P));
  m.upsilon_bar = MatrixXd::Zero(S, P);
  for (int s = 0; s < S; ++s) {
    for (int a = 0; a < A; ++a) {
      m.upsilon[static_cast<std::size_t>(s)].row(a) = score_term(s, a, m.policy, m.q(s, a)).transpose();
      m.upsilon_bar.row(s) += m.policy(s, a) * m.upsilon[static_cast<std::size_t>(s)].row(a);
    }
  }
  const VectorXd& d = m.stationary;
  m.grad_j = m.upsilon_bar.transpose() * d;
  m.var_s = VectorXd::Zero(P);
  m.evar_a = VectorXd::Zero(P);
  for (int s = 0; s < S; ++s) {
    const VectorXd dev = m.upsilon_bar.row(s).transpose() - m.grad_j;
    m.var_s += d(s) * dev.cwiseProduct(dev);
    for (int a = 0; a < A; ++a) {
      const VectorXd da = (m.upsilon[static_cast<std::size_t>(s)].row(a) - m.upsilon_bar.row(s)).transpose();
      m.evar_a += d(s) * m.policy(s, a) * da.cwiseProduct(da);
    }
  }

  m.alpha_e.assign(static_cast<std::size_t>(max_lag) + 1, VectorXd::Zero(P));
  m.e_alpha.assign(static_cast<std::size_t>(max_lag) + 1, VectorXd::Zero(P));
  const MatrixXd kernel = envs::marginal_kernel(mdp, m.policy);
  const VectorXd mean_sq = m.grad_j.cwiseProduct(m.grad_j);
  MatrixXd h = m.upsilon_bar;  // P^{t-1} upsilon_bar, S x P
  double w = 1.0;
  for (int t = 1; t <= max_lag; ++t) {
    w *= weight_discount;
    const MatrixXd ht = kernel * h;  // P^t upsilon_bar
    VectorXd ae = VectorXd::Zero(P);
    VectorXd ea = VectorXd::Zero(P);
    for (int s = 0; s < S; ++s) {
      ae += d(s) * m.upsilon_bar.row(s).transpose().cwiseProduct(ht.row(s).transpose());
      const MatrixXd g = mdp.kernel[static_cast<std::size_t>(s)] * h;  // A x P
      for (int a = 0; a < A; ++a) {
        const VectorXd da = (m.upsilon[static_cast<std::size_t>(s)].row(a) - m.upsilon_bar.row(s)).transpose();
        ea += d(s) * m.policy(s, a) * da.cwiseProduct(g.row(a).transpose());
      }
    }
    m.alpha_e[static_cast<std::size_t>(t)] = w * (ae - mean_sq);
    m.e_alpha[static_cast<std::size_t>(t)] = w * ea;
    h = ht;
  }
  return m;
}

VectorXd exact_estimator_variance(const envs::TabularMDP& mdp, const MatrixXd& logits, int T, int n,
                                  double weight_discount) {
  require(T >= 1 && n >= 1, "exact_estimator_variance: T and N must be >= 1");
  const int S = mdp.n_states;
  const int A = mdp.n_actions;
  const int P = S * A;
  const MatrixXd pi = envs::softmax_policy(logits);
  const MatrixXd q = envs::evaluate_policy(mdp, pi).q;
  const VectorXd d0 = envs::stationary_distribution(mdp, pi);

  // Conditional moments of the step average Y given (s, executed action a).
  std::vector<MatrixXd> cond_mean(static_cast<std::size_t>(S), MatrixXd::Zero(A, P));
  std::vector<MatrixXd> cond_sq(static_cast<std::size_t>(S), MatrixXd::Zero(A, P));
  const double nn = static_cast<double>(n);
  for (int s = 0; s < S; ++s) {
    VectorXd bar = VectorXd::Zero(P);
    VectorXd second = VectorXd::Zero(P);
    for (int a = 0; a < A; ++a) {
      const VectorXd u = score_term(s, a, pi, q(s, a));
      bar += pi(s, a) * u;
      second += pi(s, a) * u.cwiseProduct(u);
    }
    const VectorXd var_a = second - bar.cwiseProduct(bar);
    for (int a = 0; a < A; ++a) {
      const VectorXd u = score_term(s, a, pi, q(s, a));
      const VectorXd mean = (u + (nn - 1.0) * bar) / nn;
      cond_mean[static_cast<std::size_t>(s)].row(a) = mean.transpose();
      cond_sq[static_cast<std::size_t>(s)].row(a) = (mean.cwiseProduct(mean) + (nn - 1.0) / (nn * nn) * var_a).transpose();
    }
  }

  VectorXd p = d0;
  MatrixXd first = MatrixXd::Zero(S, P);   // E[sum_{k<t} w^k Y_k ; s_t = s]
  MatrixXd second = MatrixXd::Zero(S, P);  // E[(sum_{k<t} w^k Y_k)^2 ; s_t = s]
  double w = 1.0;
  for (int t = 0; t < T; ++t) {
    VectorXd p_next = VectorXd::Zero(S);
    MatrixXd f_next = MatrixXd::Zero(S, P);
    MatrixXd s_next = MatrixXd::Zero(S, P);
    for (int s = 0; s < S; ++s) {
      for (int a = 0; a < A; ++a) {
        const double pa = pi(s, a);
        const VectorXd my = w * cond_mean[static_cast<std::size_t>(s)].row(a).transpose();
        const VectorXd sy = w * w * cond_sq[static_cast<std::size_t>(s)].row(a).transpose();
        const VectorXd f = pa * (first.row(s).transpose() + p(s) * my);
        const VectorXd sq = pa * (second.row(s).transpose() + 2.0 * first.row(s).transpose().cwiseProduct(my) + p(s) * sy);
        for (int s2 = 0; s2 < S; ++s2) {
          const double k = mdp.p(s, a, s2);
          p_next(s2) += pa * p(s) * k;
          f_next.row(s2) += k * f.transpose();
          s_next.row(s2) += k * sq.transpose();
        }
      }
    }
    p = p_next;
    first = f_next;
    second = s_next;
    w *= weight_discount;
  }
  const VectorXd mean = first.colwise().sum().transpose();
  const VectorXd sq = second.colwise().sum().transpose();
  return (sq - mean.cwiseProduct(mean)) / (static_cast<double>(T) * T);
}

spg::Policy tabular_policy(const MatrixXd& logits) {
  spg::Policy pol(spg::tabular_policy_spec(static_cast<int>(logits.rows()), static_cast<int>(logits.cols())));
  auto w = pol.params().matrix(0);
  for (Eigen::Index s = 0; s < logits.rows(); ++s)
    for (Eigen::Index a = 0; a < logits.cols(); ++a) w(s, a) = logits(s, a);
  return pol;
}

MatrixXd sample_estimates(const envs::TabularMDP& mdp, const MatrixXd& logits, int T, int n, int count, Rng& rng,
                          double weight_discount) {
  require(T >= 1 && n >= 1 && count >= 1, "sample_estimates: T, N and count must be >= 1");
  const spg::Policy pol = tabular_policy(logits);
  const MatrixXd pi = envs::softmax_policy(logits);
  const MatrixXd q = envs::evaluate_policy(mdp, pi).q;
  const VectorXd d = envs::stationary_distribution(mdp, pi);
  std::vector<std::vector<double>> rows(static_cast<std::size_t>(mdp.n_states));
  for (int s = 0; s < mdp.n_states; ++s)
    for (int a = 0; a < mdp.n_actions; ++a) rows[static_cast<std::size_t>(s)].push_back(pi(s, a));
  auto draw = [&](int s) {
    return spg::Action::discrete(static_cast<int>(rng.categorical(rows[static_cast<std::size_t>(s)])));
  };

  envs::TabularEnv env(mdp, rng.next_u64());
  MatrixXd out(count, mdp.n_states * mdp.n_actions);
  for (int i = 0; i < count; ++i) {
    spg::Batch b;
    env.set_state(static_cast<int>(rng.categorical(std::span<const double>(d.data(), static_cast<std::size_t>(d.size())))));
    for (int t = 0; t < T; ++t) {
      const int s = env.state();
      envs::Transition tr;
      tr.state = env.observation();
      tr.action = draw(s);
      std::vector<spg::ExtraSample> extras;
      for (int k = 1; k < n; ++k) {
        const spg::Action a = draw(s);
        extras.push_back(spg::ExtraSample{a, q(s, a.index), 0.0});
      }
      b.lambda_returns.push_back(q(s, tr.action.index));
      b.time_index.push_back(t);
      b.extras.push_back(std::move(extras));
      env.step(tr.action);
      b.transitions.push_back(std::move(tr));
    }
    const auto est = spg::estimate_spg(b, pol, false, weight_discount);
    for (std::size_t j = 0; j < est.grad.size(); ++j) out(i, static_cast<Eigen::Index>(j)) = est.grad[j];
  }
  return out;
}

}  // namespace pgvlab::variance
