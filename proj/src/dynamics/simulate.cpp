#include "dynamics/simulate.hpp"

#include "common/error.hpp"

#include <cmath>

namespace pgvlab::dynamics {

namespace {

constexpr double kStateClamp = 1e6;

// Replaces non-finite entries by 0 and clamps the rest; returns the number of
// rows touched.
int sanitize(Matrix& m, std::vector<bool>& flagged) {
  int count = 0;
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    bool bad = false;
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      double& x = m(r, c);
      if (!std::isfinite(x)) {
        x = 0.0;
        bad = true;
      } else if (std::abs(x) > kStateClamp) {
        x = std::copysign(kStateClamp, x);
        bad = true;
      }
    }
    if (bad && !flagged[static_cast<std::size_t>(r)]) {
      flagged[static_cast<std::size_t>(r)] = true;
      ++count;
    }
  }
  return count;
}

std::span<const double> row_span(const Matrix& m, Eigen::Index r) {
  return {m.row(r).data(), static_cast<std::size_t>(m.cols())};
}

}  // namespace

BatchValueFn critic_values(const spg::Critic& critic) {
  return [&critic](const Matrix& obs) { return critic.values(obs); };
}

SimulatedQ simulate_q(const WorldModel& model, const BatchValueFn& value, const spg::Policy& policy,
                      const Matrix& states, std::span<const Action> actions, int horizon, double gamma, double lam,
                      Rng& rng) {
  require(horizon >= 0, "simulate_q: horizon must be >= 0");
  require_shape(static_cast<std::size_t>(states.rows()) == actions.size(), "simulate_q: row count mismatch");
  const auto n = static_cast<std::size_t>(states.rows());
  const auto steps = static_cast<std::size_t>(horizon) + 1;
  std::vector<std::vector<double>> rewards(n), next_values(n);
  std::vector<std::vector<bool>> dones(n);
  std::vector<bool> alive(n, true), flagged(n, false);
  SimulatedQ out;

  Matrix cur = states;
  std::vector<Action> acts(actions.begin(), actions.end());
  for (std::size_t k = 0; k < steps; ++k) {
    ModelStep ms = model.step(cur, acts, rng);
    out.flagged += sanitize(ms.next_obs, flagged);
    const std::vector<double> v = value ? value(ms.next_obs) : std::vector<double>(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      if (!alive[i]) continue;
      const bool done = model.terminal(row_span(ms.next_obs, static_cast<Eigen::Index>(i)));
      rewards[i].push_back(ms.reward[i]);
      next_values[i].push_back(v[i]);
      dones[i].push_back(done);
      if (done) alive[i] = false;
    }
    if (k + 1 < steps) {
      acts = policy.sample_batch(ms.next_obs, rng);
      cur = std::move(ms.next_obs);
    }
  }

  out.q.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    // values[k] must equal next_values[k-1] for the recursion to give plain
    // lambda-returns; values[0] only shifts the advantage.
    std::vector<double> values(rewards[i].size(), 0.0);
    for (std::size_t k = 1; k < values.size(); ++k) values[k] = next_values[i][k - 1];
    const auto lr = spg::lambda_returns(rewards[i], values, next_values[i], dones[i],
                                        std::vector<bool>(rewards[i].size(), false), gamma, lam);
    out.q[i] = lr.returns.front();
  }
  return out;
}

double simulate_q(const WorldModel& model, const BatchValueFn& value, const spg::Policy& policy,
                  std::span<const double> state, const Action& action, int horizon, double gamma, double lam,
                  Rng& rng) {
  return simulate_q(model, value, policy, spg::single_row(state), std::span<const Action>(&action, 1), horizon, gamma,
                    lam, rng)
      .q.front();
}

SimulatedRollouts simulate_rollout(const WorldModel& model, const BatchValueFn& value, const spg::Policy& policy,
                                   const Matrix& starts, int length, double gamma, double lam, Rng& rng) {
  require(length >= 1, "simulate_rollout: length must be >= 1");
  const auto n = static_cast<std::size_t>(starts.rows());
  const auto L = static_cast<std::size_t>(length);
  struct Step {
    std::vector<double> state;
    Action action;
    double log_prob;
    double reward;
    std::vector<double> next_state;
    bool done;
    double value;
    double next_value;
  };
  std::vector<std::vector<Step>> branches(n);
  std::vector<bool> alive(n, true), flagged(n, false);
  SimulatedRollouts out;

  Matrix cur = starts;
  std::vector<double> cur_values = value ? value(cur) : std::vector<double>(n, 0.0);
  for (std::size_t k = 0; k < L; ++k) {
    const std::vector<Action> acts = policy.sample_batch(cur, rng);
    const std::vector<double> lps = policy.log_prob_batch(cur, acts);
    ModelStep ms = model.step(cur, acts, rng);
    out.flagged += sanitize(ms.next_obs, flagged);
    const std::vector<double> nv = value ? value(ms.next_obs) : std::vector<double>(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      if (!alive[i]) continue;
      const auto ri = static_cast<Eigen::Index>(i);
      Step s;
      s.state.assign(cur.row(ri).data(), cur.row(ri).data() + cur.cols());
      s.action = acts[i];
      s.log_prob = lps[i];
      s.reward = ms.reward[i];
      s.next_state.assign(ms.next_obs.row(ri).data(), ms.next_obs.row(ri).data() + cur.cols());
      s.done = model.terminal(s.next_state);
      s.value = cur_values[i];
      s.next_value = nv[i];
      if (s.done) alive[i] = false;
      branches[i].push_back(std::move(s));
    }
    cur = std::move(ms.next_obs);
    cur_values = nv;
  }

  spg::Batch& b = out.batch;
  for (std::size_t i = 0; i < n; ++i) {
    const auto& br = branches[i];
    std::vector<double> r, v, nv;
    std::vector<bool> d;
    for (const Step& s : br) {
      r.push_back(s.reward);
      v.push_back(s.value);
      nv.push_back(s.next_value);
      d.push_back(s.done);
    }
    const auto lr = spg::lambda_returns(r, v, nv, d, std::vector<bool>(br.size(), false), gamma, lam);
    for (std::size_t k = 0; k < br.size(); ++k) {
      envs::Transition t{br[k].state, br[k].action, br[k].reward, br[k].next_state, br[k].done, false};
      b.transitions.push_back(std::move(t));
      b.time_index.push_back(static_cast<int>(k));
      b.values.push_back(br[k].value);
      b.next_values.push_back(br[k].next_value);
      b.log_probs.push_back(br[k].log_prob);
      b.lambda_returns.push_back(lr.returns[k]);
      b.advantages.push_back(lr.advantages[k]);
      out.start.push_back(static_cast<int>(i));
    }
  }
  return out;
}

}  // namespace pgvlab::dynamics
