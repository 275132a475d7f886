#include "doctest.h"

#include "common/error.hpp"
#include "envs/cartpole.hpp"
#include "envs/point_mass.hpp"
#include "envs/tabular_env.hpp"
#include "envs/tabular_mdp.hpp"

#include <cmath>

using namespace pgvlab;
using namespace pgvlab::envs;

namespace {

double max_row_sum_error(const TabularMDP& mdp) {
  double worst = 0.0;
  for (const auto& k : mdp.kernel)
    for (Eigen::Index a = 0; a < k.rows(); ++a) worst = std::max(worst, std::abs(k.row(a).sum() - 1.0));
  return worst;
}

// Builds a tabular MDP by hand; every state shares the same kernel rows.
TabularMDP chain_mdp(const Eigen::MatrixXd& p) {
  TabularMDP m;
  m.n_states = static_cast<int>(p.rows());
  m.n_actions = 2;
  m.reward = Eigen::MatrixXd::Zero(m.n_states, 2);
  for (int s = 0; s < m.n_states; ++s) {
    Eigen::MatrixXd k(2, m.n_states);
    k.row(0) = p.row(s);
    k.row(1) = p.row(s);
    m.kernel.push_back(k);
  }
  m.init_dist = Eigen::VectorXd::Constant(m.n_states, 1.0 / m.n_states);
  return m;
}

std::vector<Transition> play(Environment& env, const std::vector<Action>& actions) {
  std::vector<Transition> out;
  for (const Action& a : actions) {
    if (env.needs_reset()) env.reset();
    out.push_back(step_transition(env, a));
  }
  return out;
}

}  // namespace

TEST_CASE("random mdp rows sum to one") {
  const TabularMDP mdp = generate_random_mdp(1, 3, 2, 1.0, 0.5);
  CHECK(max_row_sum_error(mdp) <= 1e-12);
  for (int seed = 0; seed < 20; ++seed) {
    const TabularMDP m = generate_random_mdp(static_cast<std::uint64_t>(seed), 2 + seed % 6, 2 + seed % 3, 1.0,
                                             0.05 * seed);
    CHECK(max_row_sum_error(m) <= 1e-12);
    for (const auto& k : m.kernel) CHECK(k.minCoeff() >= (1.0 - 0.05 * seed) / m.n_states - 1e-15);
  }
}

TEST_CASE("random mdp is deterministic in its seed") {
  const TabularMDP a = generate_random_mdp(7, 4, 3, 2.0, 0.8);
  const TabularMDP b = generate_random_mdp(7, 4, 3, 2.0, 0.8);
  CHECK(a.reward == b.reward);
  for (int s = 0; s < 4; ++s) CHECK(a.kernel[static_cast<std::size_t>(s)] == b.kernel[static_cast<std::size_t>(s)]);
  const TabularMDP c = generate_random_mdp(8, 4, 3, 2.0, 0.8);
  CHECK(a.reward != c.reward);
}

TEST_CASE("mixing zero gives an action independent uniform kernel") {
  const TabularMDP mdp = generate_random_mdp(3, 5, 3, 1.0, 0.0);
  for (const auto& k : mdp.kernel)
    for (Eigen::Index i = 0; i < k.size(); ++i) CHECK(k.data()[i] == doctest::Approx(0.2).epsilon(1e-14));
}

TEST_CASE("generator rejects unsupported sizes") {
  CHECK_THROWS_AS(generate_random_mdp(1, 1, 2, 1.0, 0.5), ContractError);
  CHECK_THROWS_AS(generate_random_mdp(1, 2, 65, 1.0, 0.5), ContractError);
  CHECK_THROWS_AS(generate_random_mdp(1, 2, 2, 1.0, 1.5), ContractError);
}

TEST_CASE("stationary distribution: symmetric flip chain") {
  Eigen::MatrixXd p(2, 2);
  p << 0.7, 0.3, 0.3, 0.7;
  const TabularMDP mdp = chain_mdp(p);
  const auto d = stationary_distribution(mdp, uniform_policy(mdp));
  CHECK(d(0) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(d(1) == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("stationary distribution: rank one chain returns the common row") {
  Eigen::MatrixXd p(3, 3);
  p << 0.2, 0.5, 0.3, 0.2, 0.5, 0.3, 0.2, 0.5, 0.3;
  const TabularMDP mdp = chain_mdp(p);
  const auto d = stationary_distribution(mdp, uniform_policy(mdp));
  for (int i = 0; i < 3; ++i) CHECK(std::abs(d(i) - p(0, i)) < 1e-12);
  for (int t = 1; t < 4; ++t) {
    const auto k = t_step_kernel(mdp, uniform_policy(mdp), t);
    for (int r = 0; r < 3; ++r) CHECK((k.row(r) - p.row(0)).cwiseAbs().maxCoeff() < 1e-14);
  }
}

TEST_CASE("stationary distribution matches a squared matrix power") {
  const TabularMDP mdp = generate_random_mdp(1, 3, 2, 1.0, 0.5);
  const TabularPolicy pi = uniform_policy(mdp);
  Eigen::MatrixXd k = Eigen::MatrixXd::Zero(3, 3);
  for (int s = 0; s < 3; ++s)
    for (int a = 0; a < 2; ++a) k.row(s) += pi(s, a) * mdp.kernel[static_cast<std::size_t>(s)].row(a);
  for (int i = 0; i < 6; ++i) k = k * k;  // k^64
  const auto d = stationary_distribution(mdp, pi);
  CHECK((d.transpose() - k.row(0)).cwiseAbs().maxCoeff() < 1e-12);
  CHECK((d.transpose() * marginal_kernel(mdp, pi) - d.transpose()).cwiseAbs().maxCoeff() <= 1e-10);
}

TEST_CASE("t step kernel") {
  const TabularMDP mdp = generate_random_mdp(2, 4, 3, 1.0, 0.9);
  Eigen::MatrixXd logits(4, 3);
  logits.setRandom();
  const TabularPolicy pi = softmax_policy(logits);
  CHECK(t_step_kernel(mdp, pi, 0) == Eigen::MatrixXd::Identity(4, 4));
  const Eigen::MatrixXd k1 = t_step_kernel(mdp, pi, 1);
  CHECK((k1 - marginal_kernel(mdp, pi)).cwiseAbs().maxCoeff() < 1e-15);
  const Eigen::MatrixXd direct = k1 * k1 * k1 * k1 * k1;
  const Eigen::MatrixXd k5 = t_step_kernel(mdp, pi, 5);
  CHECK((direct - k5).cwiseAbs().maxCoeff() < 1e-14);
  CHECK((k5.rowwise().sum().array() - 1.0).abs().maxCoeff() < 1e-12);
  CHECK_THROWS_AS(t_step_kernel(mdp, pi, -1), ContractError);
}

TEST_CASE("policy evaluation satisfies the Bellman equation") {
  const TabularMDP mdp = generate_random_mdp(4, 5, 3, 1.0, 0.7, 0.8);
  Eigen::MatrixXd logits(5, 3);
  logits.setRandom();
  const TabularPolicy pi = softmax_policy(logits);
  const PolicyValues pv = evaluate_policy(mdp, pi);
  for (int s = 0; s < 5; ++s) {
    CHECK(std::abs(pv.v(s) - pi.row(s).dot(pv.q.row(s))) < 1e-12);
    for (int a = 0; a < 3; ++a) {
      const double backup = mdp.reward(s, a) + mdp.gamma * mdp.kernel[static_cast<std::size_t>(s)].row(a).dot(pv.v);
      CHECK(std::abs(pv.q(s, a) - backup) < 1e-12);
    }
  }
}

TEST_CASE("rewind fidelity") {
  Rng rng(11);
  SUBCASE("cartpole") {
    CartPole env(5);
    env.reset();
    std::vector<Action> actions;
    for (int i = 0; i < 300; ++i) actions.push_back(Action::discrete(static_cast<int>(rng.index(2))));
    play(env, std::vector<Action>(actions.begin(), actions.begin() + 17));
    const RewindToken tok = env.snapshot();
    const auto first = play(env, actions);
    env.restore(tok);
    const auto second = play(env, actions);
    CHECK(first == second);
  }
  SUBCASE("pointmass") {
    PointMass env(5);
    env.reset();
    std::vector<Action> actions;
    for (int i = 0; i < 400; ++i) actions.push_back(Action::continuous({rng.uniform(-1.5, 1.5), rng.normal()}));
    const RewindToken tok = env.snapshot();
    const auto first = play(env, actions);
    env.restore(tok);
    CHECK(first == play(env, actions));
  }
  SUBCASE("tabular") {
    TabularEnv env(generate_random_mdp(3, 4, 2, 1.0, 0.6), 9, 10);
    env.reset();
    std::vector<Action> actions;
    for (int i = 0; i < 50; ++i) actions.push_back(Action::discrete(static_cast<int>(rng.index(2))));
    const RewindToken tok = env.snapshot();
    const auto first = play(env, actions);
    env.restore(tok);
    CHECK(first == play(env, actions));
  }
}

TEST_CASE("restore rejects a foreign token") {
  CartPole cp(1);
  PointMass pm(1);
  cp.reset();
  pm.reset();
  CHECK_THROWS_AS(cp.restore(pm.snapshot()), ContractError);
  CHECK_THROWS_AS(pm.restore(RewindToken{}), ContractError);
}

TEST_CASE("cartpole upright with alternating forces survives") {
  CartPole env(0);
  env.reset();
  env.set_state({0.0, 0.0, 0.0, 0.0});
  for (int i = 0; i < 2; ++i) {
    const StepResult r = env.step(Action::discrete(i % 2));
    CHECK(r.reward == 1.0);
    CHECK_FALSE(r.done);
  }
}

TEST_CASE("cartpole terminates and refuses to step afterwards") {
  CartPole env(0);
  env.reset();
  StepResult r;
  int steps = 0;
  do {
    r = env.step(Action::discrete(1));
    ++steps;
  } while (!r.done && !r.truncated);
  CHECK(r.done);
  CHECK(steps < 200);
  CHECK_THROWS_AS(env.step(Action::discrete(0)), ContractError);
  env.reset();
  CHECK_NOTHROW(env.step(Action::discrete(0)));
}

TEST_CASE("cartpole truncates at the cap") {
  CartPole env(0);
  env.reset();
  StepResult r;
  for (int i = 0; i < CartPole::kMaxSteps; ++i) {
    env.set_state({0.0, 0.0, 0.0, 0.0});
    r = env.step(Action::discrete(i % 2));
  }
  CHECK(r.truncated);
  CHECK_FALSE(r.done);
}

TEST_CASE("pointmass at the goal earns near full reward") {
  PointMass env(0);
  env.reset();
  env.set_state({0.0, 0.0, 0.0, 0.0});
  for (int i = 0; i < 20; ++i) CHECK(env.step(Action::continuous({0.0, 0.0})).reward >= 0.99);
}

TEST_CASE("pointmass episode length and arena") {
  PointMass env(0);
  env.reset();
  int steps = 0;
  StepResult r;
  do {
    r = env.step(Action::continuous({1.0, -1.0}));
    ++steps;
    CHECK(std::abs(r.next_state[0]) <= PointMass::kArena);
  } while (!r.truncated);
  CHECK(steps == PointMass::kMaxSteps);
  CHECK_THROWS_AS(env.step(Action::continuous({0.0, 0.0})), ContractError);
}

TEST_CASE("tabular env follows the kernel") {
  const TabularMDP mdp = generate_random_mdp(5, 3, 2, 1.0, 1.0);
  TabularEnv env(mdp, 1);
  env.reset();
  Eigen::MatrixXd counts = Eigen::MatrixXd::Zero(3, 3);
  const int n = 60000;
  for (int i = 0; i < n; ++i) {
    env.set_state(0);
    const auto r = env.step(Action::discrete(1));
    CHECK(r.reward == mdp.reward(0, 1));
    counts(0, TabularEnv::decode(r.next_state)) += 1.0;
  }
  for (int s = 0; s < 3; ++s) {
    const double p = mdp.p(0, 1, s);
    CHECK(std::abs(counts(0, s) / n - p) < 4.0 * std::sqrt(p * (1 - p) / n));
  }
}

TEST_CASE("encode_action") {
  std::vector<double> out(3);
  encode_action(ActionSpace{true, 3, 0, 0, 0}, Action::discrete(2), out);
  CHECK(out == std::vector<double>{0, 0, 1});
  std::vector<double> c(2);
  encode_action(ActionSpace{false, 0, 2, -1, 1}, Action::continuous({0.5, -0.25}), c);
  CHECK(c == std::vector<double>{0.5, -0.25});
  CHECK_THROWS_AS(encode_action(ActionSpace{true, 3, 0, 0, 0}, Action::discrete(3), out), ContractError);
  CHECK(make_environment("cartpole", 1)->name() == "cartpole");
  CHECK_THROWS_AS(make_environment("walker", 1), ContractError);
}
