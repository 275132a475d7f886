#include "spg/estimator.hpp"

#include "common/error.hpp"

#include <cmath>

namespace pgvlab::spg {

LambdaReturns lambda_returns(std::span<const double> rewards, std::span<const double> values,
                             std::span<const double> next_values, const std::vector<bool>& dones,
                             const std::vector<bool>& cuts, double gamma, double lam) {
  const std::size_t n = rewards.size();
  require_shape(values.size() == n && next_values.size() == n && dones.size() == n && cuts.size() == n,
                "lambda_returns: input lengths differ");
  require(gamma >= 0.0 && gamma <= 1.0, "lambda_returns: gamma must lie in [0, 1]");
  require(lam >= 0.0 && lam <= 1.0, "lambda_returns: lambda must lie in [0, 1]");
  LambdaReturns out;
  out.returns.resize(n);
  out.advantages.resize(n);
  double next_adv = 0.0;
  for (std::size_t i = n; i-- > 0;) {
    const double live = dones[i] ? 0.0 : 1.0;
    const double carry = (cuts[i] || i + 1 == n) ? 0.0 : 1.0;
    const double delta = rewards[i] + gamma * live * next_values[i] - values[i];
    next_adv = delta + gamma * lam * live * carry * next_adv;
    out.advantages[i] = next_adv;
    out.returns[i] = next_adv + values[i];
  }
  return out;
}

LambdaReturns lambda_returns(std::span<const double> rewards, std::span<const double> values,
                             const std::vector<bool>& dones, double gamma, double lam) {
  require_shape(values.size() == rewards.size() + 1, "lambda_returns: values needs one bootstrap entry");
  return lambda_returns(rewards, values.first(rewards.size()), values.subspan(1), dones, dones, gamma, lam);
}

std::string method_name(Method m) {
  switch (m) {
    case Method::ac: return "AC";
    case Method::ppo: return "PPO";
    case Method::qma: return "QMA";
    case Method::mbma: return "MBMA";
    case Method::mbpo: return "MBPO";
  }
  return "?";
}

Method parse_method(const std::string& name) {
  for (Method m : {Method::ac, Method::ppo, Method::qma, Method::mbma, Method::mbpo})
    if (method_name(m) == name) return m;
  throw ConfigError("unknown method '" + name + "' (expected AC, PPO, QMA, MBMA or MBPO)");
}

int Batch::actions_per_state() const {
  require(!extras.empty() || !transitions.empty(), "Batch: empty");
  if (extras.empty()) return 1;
  const std::size_t k = extras.front().size();
  for (const auto& e : extras) require(e.size() == k, "Batch: states carry different numbers of actions");
  return static_cast<int>(k) + 1;
}

void Batch::validate() const {
  const std::size_t n = transitions.size();
  require(n > 0, "Batch: empty");
  require_shape(time_index.size() == n, "Batch: time_index length");
  require_shape(lambda_returns.size() == n, "Batch: lambda_returns length");
  require_shape(extras.empty() || extras.size() == n, "Batch: extras length");
  require_shape(values.empty() || values.size() == n, "Batch: values length");
  require_shape(advantages.empty() || advantages.size() == n, "Batch: advantages length");
}

ParamVector grad_term(const Policy& policy, std::span<const double> obs, const Action& action, double q, int t,
                      double gamma) {
  if (!std::isfinite(q)) throw NumericError("grad_term: q estimate is not finite");
  require(t >= 0, "grad_term: negative time index");
  ParamVector g = policy.grad_log_prob(obs, action);
  const double w = std::pow(gamma, t) * q;
  for (double& x : g.values()) x *= w;
  return g;
}

GradientEstimate estimate_spg(const Batch& batch, const Policy& policy, bool use_baseline, double weight_discount,
                              Method method) {
  batch.validate();
  const int n_act = batch.actions_per_state();
  if (use_baseline) {
    require(batch.advantages.size() == batch.size() && batch.values.size() == batch.size(),
            "estimate_spg: baseline requested but batch has no values/advantages");
  }
  const std::size_t T = batch.size();
  const std::size_t rows = T * static_cast<std::size_t>(n_act);
  Matrix obs(static_cast<Eigen::Index>(rows), policy.spec().obs_dim);
  Matrix w(static_cast<Eigen::Index>(rows), 1);
  std::vector<Action> actions;
  actions.reserve(rows);
  const double scale = 1.0 / (static_cast<double>(T) * n_act);
  Eigen::Index r = 0;
  for (std::size_t t = 0; t < T; ++t) {
    const auto& tr = batch.transitions[t];
    require_shape(static_cast<int>(tr.state.size()) == policy.spec().obs_dim, "estimate_spg: observation width");
    const double disc = std::pow(weight_discount, batch.time_index[t]) * scale;
    auto put = [&](const Action& a, double coef) {
      if (!std::isfinite(coef)) throw NumericError("estimate_spg: non-finite advantage or q estimate");
      for (std::size_t c = 0; c < tr.state.size(); ++c) obs(r, static_cast<Eigen::Index>(c)) = tr.state[c];
      w(r, 0) = disc * coef;
      actions.push_back(a);
      ++r;
    };
    put(tr.action, use_baseline ? batch.advantages[t] : batch.lambda_returns[t]);
    if (!batch.extras.empty()) {
      for (const ExtraSample& e : batch.extras[t]) put(e.action, use_baseline ? e.q - batch.values[t] : e.q);
    }
  }
  ndiff::Tape tape;
  const ndiff::Var lp = policy.log_prob(tape, policy.params(), obs, actions);
  const ndiff::Var total = ndiff::sum(lp * tape.constant(std::move(w)));
  tape.backward(total);
  GradientEstimate est;
  est.grad = tape.gradient(policy.params());
  if (!est.grad.all_finite()) throw NumericError("estimate_spg: gradient is not finite");
  est.method = method;
  est.n_actions = n_act;
  est.n_states = static_cast<int>(T);
  return est;
}

double rewound_q(envs::Environment& env, const envs::RewindToken& token, const Action& first, const Policy& policy,
                 int horizon, const ValueFn& value, double gamma, Rng& rng) {
  require(horizon >= 0, "rewound_q: horizon must be >= 0");
  env.restore(token);
  // The token carries the environment's noise stream; each rollout draws its own.
  env.seed(rng.next_u64());
  double q = 0.0;
  double disc = 1.0;
  Action a = first;
  for (int k = 0;; ++k) {
    const envs::StepResult r = env.step(a);
    q += disc * r.reward;
    disc *= gamma;
    if (r.done) break;
    if (r.truncated || k == horizon) {
      if (value) q += disc * value(r.next_state);
      break;
    }
    a = policy.sample(r.next_state, rng);
  }
  env.restore(token);
  return q;
}

std::vector<ExtraSample> many_action_sample_env(envs::Environment& env, const envs::RewindToken& token,
                                                const Policy& policy, int n_extra, int horizon,
                                                const ValueFn& value, double gamma, Rng& rng) {
  require(n_extra >= 0, "many_action_sample_env: n_extra must be >= 0");
  env.restore(token);
  const std::vector<double> obs = env.observation();
  std::vector<ExtraSample> out;
  out.reserve(static_cast<std::size_t>(n_extra));
  for (int i = 0; i < n_extra; ++i) {
    ExtraSample e;
    e.action = policy.sample(obs, rng);
    e.log_prob = policy.log_prob(obs, e.action);
    e.q = rewound_q(env, token, e.action, policy, horizon, value, gamma, rng);
    out.push_back(std::move(e));
  }
  return out;
}

}  // namespace pgvlab::spg
