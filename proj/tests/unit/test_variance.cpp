#include "doctest.h"

#include "common/error.hpp"
#include "support/oracles.hpp"
#include "support/tabular_fleet.hpp"
#include "variance/reports.hpp"

#include <cmath>

using namespace pgvlab;
using namespace pgvlab::variance;
using testing::fleet_case;

namespace {

// Var[Y_0] for the N-action average by enumerating every action tuple, with
// gradient terms from the policy network's own backward pass.
VectorXd brute_force_step_variance(const envs::TabularMDP& mdp, const MatrixXd& logits, int N) {
  const spg::Policy pol = tabular_policy(logits);
  const MatrixXd pi = envs::softmax_policy(logits);
  const MatrixXd q = envs::evaluate_policy(mdp, pi).q;
  const VectorXd d = envs::stationary_distribution(mdp, pi);
  const int S = mdp.n_states, A = mdp.n_actions, P = S * A;
  VectorXd first = VectorXd::Zero(P), second = VectorXd::Zero(P);
  for (int s = 0; s < S; ++s) {
    std::vector<VectorXd> terms;
    std::vector<double> obs(static_cast<std::size_t>(S), 0.0);
    obs[static_cast<std::size_t>(s)] = 1.0;
    for (int a = 0; a < A; ++a) {
      const auto g = pol.grad_log_prob(obs, spg::Action::discrete(a));
      terms.push_back(q(s, a) * Eigen::Map<const VectorXd>(g.values().data(), P));
    }
    std::vector<int> tuple(static_cast<std::size_t>(N), 0);
    for (;;) {
      double prob = d(s);
      VectorXd y = VectorXd::Zero(P);
      for (int a : tuple) {
        prob *= pi(s, a);
        y += terms[static_cast<std::size_t>(a)] / N;
      }
      first += prob * y;
      second += prob * y.cwiseProduct(y);
      std::size_t k = 0;
      while (k < tuple.size() && ++tuple[k] == A) tuple[k++] = 0;
      if (k == tuple.size()) break;
    }
  }
  return second - first.cwiseProduct(first);
}

double max_abs(const VectorXd& v) { return v.cwiseAbs().maxCoeff(); }

}  // namespace

TEST_CASE("decomposition reproduces the exact estimator variance") {
  for (int i = 0; i < 8; ++i) {
    const auto c = fleet_case(i);
    const Moments m = exact_moments(c.mdp, c.logits, 15);
    for (int T : {1, 4, 16})
      for (int N : {1, 2, 8}) {
        const VarianceReport r = clt_variance(m, T, N);
        const VectorXd direct = exact_estimator_variance(c.mdp, c.logits, T, N) * T;
        CHECK(max_abs(r.marginalized + r.policy_dependent - direct) < 1e-10);
        CHECK(max_abs(r.total * T - direct) < 1e-10);
      }
  }
}

TEST_CASE("law of total variance at lag zero") {
  for (int i = 0; i < 6; ++i) {
    const auto c = fleet_case(i);
    const Moments m = exact_moments(c.mdp, c.logits, 0);
    for (int N : {1, 2, 4}) {
      const VectorXd direct = brute_force_step_variance(c.mdp, c.logits, N);
      CHECK(max_abs(m.var_s + m.evar_a / N - direct) < 1e-10);
    }
  }
}

TEST_CASE("contextual bandit has no lag covariance") {
  const auto c = fleet_case(3, 0.0);
  const Moments m = exact_moments(c.mdp, c.logits, 10);
  for (int t = 1; t <= 10; ++t) {
    CHECK(max_abs(m.alpha_e[static_cast<std::size_t>(t)]) < 1e-14);
    CHECK(max_abs(m.e_alpha[static_cast<std::size_t>(t)]) < 1e-14);
  }
}

TEST_CASE("near-deterministic policy has no action variance") {
  const auto c = fleet_case(4);
  MatrixXd logits = MatrixXd::Zero(c.logits.rows(), c.logits.cols());
  for (Eigen::Index s = 0; s < logits.rows(); ++s) logits(s, s % logits.cols()) = 60.0;
  const Moments m = exact_moments(c.mdp, logits, 2);
  CHECK(max_abs(m.evar_a) < 1e-20);
}

TEST_CASE("clt_variance limits") {
  const auto c = fleet_case(5);
  const Moments m = exact_moments(c.mdp, c.logits, 7);
  const VarianceReport big = clt_variance(m, 8, 1000000);
  CHECK(max_abs(big.total * 8 - big.marginalized) < 1e-5 * (1.0 + max_abs(big.marginalized)));
  const VarianceReport one = clt_variance(m, 8, 1);
  // Single action: the lag sum with Cov[Y, Y^t] directly.
  VectorXd direct = m.var_s + m.evar_a;
  for (int t = 1; t < 8; ++t) direct += 2.0 * (8 - t) / 8.0 * m.single_action_covariance(t);
  CHECK(max_abs(one.total - direct / 8.0) < 1e-14);
  CHECK(one.cov_trace.size() == 7);
  CHECK_THROWS_AS(clt_variance(m, 9, 1), ContractError);
}

TEST_CASE("delta_N is the forward difference in N") {
  for (int i = 0; i < 6; ++i) {
    const auto c = fleet_case(i);
    const int T = 6;
    const Moments m = exact_moments(c.mdp, c.logits, T);
    for (int N = 1; N <= 4; ++N) {
      const DeltaReport d = delta_reports(m, T, N, 1.0);
      const VectorXd diff = exact_estimator_variance(c.mdp, c.logits, T, N + 1) -
                            exact_estimator_variance(c.mdp, c.logits, T, N);
      CHECK(max_abs(d.delta_n - diff) < 1e-10);
    }
  }
}

TEST_CASE("delta prefactors") {
  const auto c = fleet_case(0);
  const Moments m = exact_moments(c.mdp, c.logits, 199);
  const DeltaReport d = delta_reports(m, 100, 1, 1.0);
  CHECK(d.alpha_n == doctest::Approx(-0.005));
  // -delta / (T + delta T) = -1/200; the forward-difference tests pin this form.
  CHECK(d.alpha_t == doctest::Approx(-0.005));
  CHECK(d.tail.has_value());
  CHECK_FALSE(delta_reports(m, 100, 1, 0.333).tail.has_value());
  CHECK_THROWS_AS(delta_reports(m, 100, 1, 0.0), ContractError);
}

TEST_CASE("delta_T against two exact lengths") {
  for (int i = 0; i < 6; ++i) {
    const auto c = fleet_case(i, 0.3);
    const int T = 8;
    for (double delta : {0.5, 1.0, 2.0}) {
      const int T2 = T + static_cast<int>(delta * T);
      const Moments m = exact_moments(c.mdp, c.logits, T2);
      for (int N : {1, 3}) {
        const DeltaReport d = delta_reports(m, T, N, delta);
        const VectorXd diff = exact_estimator_variance(c.mdp, c.logits, T2, N) -
                              exact_estimator_variance(c.mdp, c.logits, T, N);
        REQUIRE(d.tail.has_value());
        CHECK(max_abs(diff - d.delta_t - *d.tail) < 1e-10);
        // Fast mixing: the dropped tail is small relative to delta_T.
        CHECK(max_abs(*d.tail) <= 0.05 * max_abs(d.delta_t) + 1e-12);
      }
    }
  }
}

TEST_CASE("optimality verdict agrees with the delta comparison") {
  int preferred = 0;
  for (int i = 0; i < 20; ++i) {
    const auto c = fleet_case(i);
    for (int T : {4, 16}) {
      const Moments m = exact_moments(c.mdp, c.logits, T - 1);
      for (int N : {1, 2, 4})
        for (double delta : {0.25, 0.5, 1.0}) {
          const Optimality o = ma_optimality(m, T, N, delta);
          const DeltaReport d = delta_reports(m, T, N, delta);
          CHECK(o.ma_preferred == (d.delta_t_mean() >= d.delta_n_mean()));
          preferred += o.ma_preferred ? 1 : 0;
          if (N == 1 && delta == 1.0) {
            REQUIRE(o.special_lhs.has_value());
            CHECK(std::abs((*o.special_lhs - *o.special_rhs) - (o.lhs - o.rhs)) < 1e-12);
          }
        }
    }
  }
  CHECK(preferred > 0);
}

TEST_CASE("bandits never prefer extra actions at delta >= 1") {
  for (int i = 0; i < 20; ++i) {
    const auto c = fleet_case(i, 0.0);
    const Moments m = exact_moments(c.mdp, c.logits, 15);
    for (double delta : {1.0, 2.0}) CHECK_FALSE(ma_optimality(m, 16, 1, delta).ma_preferred);
  }
}

TEST_CASE("bandit with identical states prefers extra actions at delta 0.5") {
  envs::TabularMDP mdp = envs::generate_random_mdp(5, 3, 2, 1.0, 0.0);
  // Action-independent rewards make Q constant per state, so Ybar = 0.
  for (int s = 0; s < 3; ++s) mdp.reward.row(s).setConstant(0.3 + s);
  Rng rng(2);
  const Moments m = exact_moments(mdp, testing::random_logits(3, 2, rng), 7);
  CHECK(max_abs(m.var_s) < 1e-14);
  const Optimality o = ma_optimality(m, 8, 1, 0.5);
  CHECK(o.ma_preferred);
  CHECK(o.lhs == doctest::Approx(0.5 * param_mean(m.evar_a)).epsilon(1e-12));
}

TEST_CASE("lag covariance decays geometrically") {
  for (int i = 0; i < 10; ++i) {
    const auto c = fleet_case(i);
    const int L = 40;
    const Moments m = exact_moments(c.mdp, c.logits, L);
    const MatrixXd k = envs::marginal_kernel(c.mdp, m.policy);
    Eigen::EigenSolver<MatrixXd> es(k);
    std::vector<double> mods;
    for (Eigen::Index j = 0; j < es.eigenvalues().size(); ++j) mods.push_back(std::abs(es.eigenvalues()(j)));
    std::sort(mods.rbegin(), mods.rend());
    const double rho = mods.size() > 1 ? mods[1] : 0.0;
    double scale = 0.0;
    for (int t = 1; t <= 3; ++t)
      scale = std::max(scale, std::abs(param_mean(m.single_action_covariance(t))) / std::pow(rho + 1e-3, t));
    for (int t = 4; t <= L; ++t)
      CHECK(std::abs(param_mean(m.single_action_covariance(t))) <= 4.0 * t * scale * std::pow(rho + 1e-3, t) + 1e-15);
  }
}

TEST_CASE("variance is non-increasing in N and T with nonnegative covariances") {
  int checked = 0;
  for (int i = 0; i < 20; ++i) {
    const auto c = fleet_case(i);
    const Moments m = exact_moments(c.mdp, c.logits, 16);
    bool nonneg = true;
    for (int t = 1; t <= 16; ++t)
      nonneg &= param_mean(m.alpha_e[static_cast<std::size_t>(t)]) >= 0 && param_mean(m.e_alpha[static_cast<std::size_t>(t)]) >= 0;
    if (!nonneg) continue;
    ++checked;
    for (int N = 1; N < 8; ++N) CHECK(clt_variance(m, 8, N + 1).total_mean() <= clt_variance(m, 8, N).total_mean() + 1e-15);
    for (int T = 1; T < 16; ++T) CHECK(clt_variance(m, T + 1, 2).total_mean() <= clt_variance(m, T, 2).total_mean() + 1e-15);
  }
  CHECK(checked > 0);
}

TEST_CASE("sampled estimates: unbiased, variance ordered, consistent with the report") {
  const auto c = fleet_case(1);
  const Moments m = exact_moments(c.mdp, c.logits, 7);
  Rng rng(42);
  double var_prev = 1e300;
  for (int N : {1, 2, 4}) {
    const MatrixXd x = sample_estimates(c.mdp, c.logits, 8, N, 20000, rng);
    const VectorXd mean = x.colwise().mean().transpose();
    const VectorXd var = ((x.rowwise() - mean.transpose()).array().square().colwise().sum() / (x.rows() - 1.0)).matrix().transpose();
    for (Eigen::Index p = 0; p < mean.size(); ++p)
      CHECK(std::abs(mean(p) - m.grad_j(p)) <= 4.0 * std::sqrt(var(p) / x.rows()) + 1e-14);
    const VarianceReport r = clt_variance(m, 8, N);
    // Scalar reduction with its own standard error.
    VectorXd z(x.rows());
    for (Eigen::Index i = 0; i < x.rows(); ++i) z(i) = (x.row(i).transpose() - mean).array().square().mean();
    const double se = std::sqrt((z.array() - z.mean()).square().sum() / (z.size() - 1.0) / z.size());
    CHECK(std::abs(z.mean() * x.rows() / (x.rows() - 1.0) - r.total_mean()) < 4.0 * se);
    CHECK(var.mean() <= var_prev);
    var_prev = var.mean();
  }
}

TEST_CASE("baseline shifts cancel under the policy average") {
  const auto c = fleet_case(2);
  const MatrixXd pi = envs::softmax_policy(c.logits);
  const spg::Policy pol = tabular_policy(c.logits);
  for (int s = 0; s < c.mdp.n_states; ++s) {
    std::vector<double> obs(static_cast<std::size_t>(c.mdp.n_states), 0.0);
    obs[static_cast<std::size_t>(s)] = 1.0;
    ndiff::ParamVector acc = pol.params().zeros_like();
    for (int a = 0; a < c.mdp.n_actions; ++a) acc.axpy(pi(s, a) * 3.7, pol.grad_log_prob(obs, spg::Action::discrete(a)));
    CHECK(std::sqrt(acc.squared_norm()) < 1e-14);
  }
}

TEST_CASE("exact lag covariances match sampled pairs") {
  const envs::TabularMDP mdp = envs::generate_random_mdp(1, 3, 2, 1.0, 0.5);
  Rng rng(3);
  const MatrixXd logits = testing::random_logits(3, 2, rng);
  const Moments m = exact_moments(mdp, logits, 3);
  const MatrixXd pi = m.policy;
  const int n = 200000;
  std::vector<testing::RunningMoments> cov(3);
  for (int i = 0; i < n; ++i) {
    int s = static_cast<int>(rng.categorical(std::span<const double>(m.stationary.data(), 3)));
    std::vector<double> pr{pi(s, 0), pi(s, 1)};
    int a = static_cast<int>(rng.categorical(pr));
    const VectorXd y0 = m.upsilon[static_cast<std::size_t>(s)].row(a).transpose() - m.grad_j;
    for (int t = 1; t <= 3; ++t) {
      std::vector<double> row(3);
      for (int k = 0; k < 3; ++k) row[static_cast<std::size_t>(k)] = mdp.p(s, a, k);
      s = static_cast<int>(rng.categorical(row));
      pr = {pi(s, 0), pi(s, 1)};
      a = static_cast<int>(rng.categorical(pr));
      const VectorXd yt = m.upsilon[static_cast<std::size_t>(s)].row(a).transpose() - m.grad_j;
      cov[static_cast<std::size_t>(t - 1)].push(y0.cwiseProduct(yt).mean());
    }
  }
  for (int t = 1; t <= 3; ++t) {
    const auto& c = cov[static_cast<std::size_t>(t - 1)];
    CHECK(std::abs(c.mean - param_mean(m.single_action_covariance(t))) < 4.0 * c.standard_error());
  }
}

TEST_CASE("Monte-Carlo decomposition against exact moments") {
  const envs::TabularMDP mdp = envs::generate_random_mdp(1, 3, 2, 1.0, 0.5);
  Rng rng(4);
  const MatrixXd logits = testing::random_logits(3, 2, rng);
  const Moments m = exact_moments(mdp, logits, 0);
  const McDecomposition mc = mc_decomposition(mdp, logits, 40000, 4, rng);
  CHECK(std::abs(mc.var_s_mean - param_mean(m.var_s)) < 4.0 * mc.var_s_se);
  CHECK(std::abs(mc.evar_a_mean - param_mean(m.evar_a)) < 4.0 * mc.evar_a_se);
  CHECK(mc.pooled_mean == doctest::Approx(mc.var_s_mean + mc.evar_a_mean).epsilon(0.05));

  MatrixXd det = MatrixXd::Zero(3, 2);
  det.col(0).setConstant(60.0);
  const McDecomposition d = mc_decomposition(mdp, det, 2000, 3, rng);
  CHECK(d.policy_share() < 1e-12);
  CHECK_THROWS_AS(mc_decomposition(mdp, logits, 999, 3, rng), DegenerateInputError);
}
