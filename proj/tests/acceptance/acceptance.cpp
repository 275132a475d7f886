// Acceptance driver. One line per criterion:
//   A<k> PASS|FAIL  <measurements>  (<seconds>s)
// The exit status is 0 once every requested criterion has been evaluated, so a
// FAIL is reported rather than hidden; --strict turns FAIL into exit 1.

#include "agents/collect.hpp"
#include "agents/trainer.hpp"
#include "cli/config.hpp"
#include "cli/runner.hpp"
#include "common/error.hpp"
#include "dynamics/bias.hpp"
#include "envs/cartpole.hpp"
#include "ndiff/mlp.hpp"
#include "ndiff/tape.hpp"
#include "spg/estimator.hpp"
#include "support/oracles.hpp"
#include "support/tabular_fleet.hpp"
#include "variance/moments.hpp"
#include "variance/reports.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

using namespace pgvlab;
using Eigen::MatrixXd;
using Eigen::VectorXd;
namespace fs = std::filesystem;

namespace {

struct Verdict {
  bool pass = false;
  std::string detail;
};

struct Options {
  fs::path out = "acceptance_out";
  fs::path configs = "configs";
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double max_abs(const VectorXd& v) { return v.size() == 0 ? 0.0 : v.cwiseAbs().maxCoeff(); }

// ---------------------------------------------------------------- A1

Verdict a1(const Options&) {
  Rng rng(2024);
  double worst = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    ndiff::MlpSpec spec;
    spec.input_dim = 1 + static_cast<int>(rng.index(6));
    const int depth = static_cast<int>(rng.index(4));
    for (int l = 0; l < depth; ++l) spec.hidden_sizes.push_back(1 + static_cast<int>(rng.index(12)));
    spec.output_dim = 1 + static_cast<int>(rng.index(4));
    spec.activation = rng.uniform() < 0.5 ? ndiff::Activation::tanh : ndiff::Activation::relu;
    spec.bias = rng.uniform() < 0.8;
    ndiff::ParamVector params;
    const ndiff::Mlp net(spec, params);
    for (double& v : params.values()) v = rng.normal(0.0, 0.7);
    const int rows = 1 + static_cast<int>(rng.index(8));
    ndiff::Matrix x(rows, spec.input_dim), target(rows, spec.output_dim);
    for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = rng.normal();
    for (Eigen::Index i = 0; i < target.size(); ++i) target.data()[i] = rng.normal();

    auto loss = [&](const ndiff::ParamVector& p) {
      const ndiff::Matrix y = net.forward(p, x);
      return (y - target).array().square().sum() + y.array().tanh().sum();
    };
    ndiff::Tape tape;
    const ndiff::Var y = net.forward(tape, params, tape.constant(x));
    tape.backward(ndiff::add(ndiff::sum(ndiff::square(ndiff::sub(y, tape.constant(target)))), ndiff::sum(ndiff::tanh(y))));
    const ndiff::ParamVector g = tape.gradient(params);
    const ndiff::ParamVector fd = testing::central_differences(params, loss);
    worst = std::max(worst, testing::max_relative_error(g.values(), fd.values()));
  }
  return {worst < 1e-4, fmt("max relative error %.3g over 50 nets (< 1e-4)", worst)};
}

// ---------------------------------------------------------------- A2

Verdict a2(const Options&) {
  double worst_decomp = 0.0, worst_lotv = 0.0;
  for (int i = 0; i < 20; ++i) {
    const auto c = testing::fleet_case(i);
    const variance::Moments m = variance::exact_moments(c.mdp, c.logits, 15);
    for (int T : {1, 2, 4, 8, 16})
      for (int N : {1, 2, 4, 8}) {
        const variance::VarianceReport r = variance::clt_variance(m, T, N);
        const VectorXd exact = variance::exact_estimator_variance(c.mdp, c.logits, T, N);
        const VectorXd lhs = r.marginalized + r.policy_dependent;
        worst_decomp = std::max(worst_decomp, max_abs(lhs - T * exact) / std::max(1.0, max_abs(T * exact)));
      }
    // Var[Y] at t = 0 by direct enumeration over d(s) pi(a|s).
    const int P = m.parameter_count();
    VectorXd ey = VectorXd::Zero(P), ey2 = VectorXd::Zero(P);
    for (int s = 0; s < m.n_states; ++s)
      for (int a = 0; a < m.n_actions; ++a) {
        const double w = m.stationary(s) * m.policy(s, a);
        const VectorXd y = m.upsilon[static_cast<std::size_t>(s)].row(a).transpose();
        ey += w * y;
        ey2 += w * y.cwiseProduct(y);
      }
    const VectorXd var_y = ey2 - ey.cwiseProduct(ey);
    worst_lotv = std::max(worst_lotv, max_abs(var_y - m.var_s - m.evar_a));
  }
  return {worst_decomp < 1e-10 && worst_lotv < 1e-10,
          fmt("decomposition residual %.3g, law of total variance residual %.3g (< 1e-10)", worst_decomp, worst_lotv)};
}

// ---------------------------------------------------------------- A3

Verdict a3(const Options&) {
  const int n = 100000, T = 8;
  double worst_z = 0.0;
  int compared = 0;
  Rng rng(99);
  for (int i = 0; i < 5; ++i) {
    const auto c = testing::fleet_case(i);
    const variance::Moments m = variance::exact_moments(c.mdp, c.logits, T - 1);
    for (int N : {1, 2}) {
      const MatrixXd x = variance::sample_estimates(c.mdp, c.logits, T, N, n, rng);
      const VectorXd predicted = variance::clt_variance(m, T, N).total;
      for (Eigen::Index p = 0; p < x.cols(); ++p) {
        const VectorXd col = x.col(p);
        const VectorXd d = col.array() - col.mean();
        const double m2 = d.squaredNorm() / n, m4 = d.array().pow(4).sum() / n;
        const double var = m2 * n / (n - 1.0);
        if (predicted(p) < 1e-14 && var < 1e-14) continue;  // structurally zero entries
        const double se = std::sqrt(std::max(m4 - var * var * (n - 3.0) / (n - 1.0), 0.0) / n);
        worst_z = std::max(worst_z, std::abs(var - predicted(p)) / se);
        ++compared;
      }
    }
  }
  return {worst_z <= 4.0, fmt("largest |empirical - predicted| / SE = %.2f over %d parameters (<= 4)", worst_z, compared)};
}

// ---------------------------------------------------------------- A4

Verdict a4(const Options&) {
  double worst_n = 0.0, worst_t = 0.0;
  int tail_violations = 0, checked = 0;
  for (int i = 0; i < 20; ++i) {
    const auto c = testing::fleet_case(i);
    const int T = 6;
    const variance::Moments m = variance::exact_moments(c.mdp, c.logits, T);
    for (int N = 1; N <= 4; ++N) {
      const variance::DeltaReport d = variance::delta_reports(m, T, N, 1.0);
      const VectorXd diff = variance::exact_estimator_variance(c.mdp, c.logits, T, N + 1) -
                            variance::exact_estimator_variance(c.mdp, c.logits, T, N);
      worst_n = std::max(worst_n, max_abs(d.delta_n - diff));
    }
  }
  for (int i = 0; i < 20; ++i) {
    const auto c = testing::fleet_case(i, 0.3);  // fast mixing
    const int T = 8;
    for (double delta : {0.5, 1.0, 2.0}) {
      const int T2 = T + static_cast<int>(delta * T);
      const variance::Moments m = variance::exact_moments(c.mdp, c.logits, T2);
      for (int N : {1, 2, 4}) {
        const variance::DeltaReport d = variance::delta_reports(m, T, N, delta);
        const VectorXd diff = variance::exact_estimator_variance(c.mdp, c.logits, T2, N) -
                              variance::exact_estimator_variance(c.mdp, c.logits, T, N);
        if (!d.tail) return {false, "tail term unavailable"};
        ++checked;
        const VectorXd residual = diff - d.delta_t;
        worst_t = std::max(worst_t, max_abs(residual - *d.tail));
        // The residual must be no larger than the tail that the formula drops.
        for (Eigen::Index p = 0; p < residual.size(); ++p)
          if (std::abs(residual(p)) > std::abs((*d.tail)(p)) + 1e-10) ++tail_violations;
      }
    }
  }
  return {worst_n < 1e-10 && worst_t < 1e-10 && tail_violations == 0,
          fmt("delta_N error %.3g, delta_T residual minus tail %.3g, %d entries exceed the tail over %d cases", worst_n,
              worst_t, tail_violations, checked)};
}

// ---------------------------------------------------------------- A5

Verdict a5(const Options&) {
  int agree = 0, bandit_preferred = 0;
  for (int i = 0; i < 20; ++i) {
    const auto c = testing::fleet_case(i);
    const variance::Moments m = variance::exact_moments(c.mdp, c.logits, 15);
    const variance::Optimality o = variance::ma_optimality(m, 16, 1, 1.0);
    const variance::DeltaReport d = variance::delta_reports(m, 16, 1, 1.0);
    agree += o.ma_preferred == (d.delta_t_mean() - d.delta_n_mean() >= 0.0);
  }
  for (int i = 0; i < 20; ++i) {
    const auto c = testing::fleet_case(100 + i, 0.0);  // action-independent kernel
    const variance::Moments m = variance::exact_moments(c.mdp, c.logits, 15);
    for (double delta : {1.0, 2.0}) bandit_preferred += variance::ma_optimality(m, 16, 1, delta).ma_preferred;
  }
  return {agree == 20 && bandit_preferred == 0,
          fmt("verdict agrees on %d/20 MDPs; extra actions preferred in %d/40 bandit cases", agree, bandit_preferred)};
}

// ---------------------------------------------------------------- CSV helpers

std::vector<std::vector<std::string>> read_rows(const fs::path& p) {
  std::ifstream in(p);
  std::vector<std::vector<std::string>> rows;
  std::string line;
  int n = 0;
  while (std::getline(in, line)) {
    if (n++ < 2) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    rows.push_back(cells);
  }
  return rows;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

cli::ExperimentConfig load(const Options& o, const std::string& name) {
  const auto r = cli::load_config((o.configs / name).string());
  if (!r.ok()) throw ConfigError(name + ": " + cli::format(r.diagnostics.front()));
  return *r.config;
}

void run_or_throw(const cli::ExperimentConfig& c, const fs::path& dir) {
  const auto outcome = cli::run_experiment(c, {dir.string(), 0, 0});
  if (outcome.exit_code != cli::kExitOk) throw std::runtime_error("run failed: " + outcome.message);
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

// ---------------------------------------------------------------- A6

Verdict a6(const Options& o) {
  const cli::ExperimentConfig c = load(o, "fig1.ini");
  if (c.seeds.size() < 10) return {false, "fewer than 10 seeds configured"};
  const fs::path dir = o.out / "fig1";
  run_or_throw(c, dir);
  std::map<std::pair<int, int>, std::vector<double>> steps, gains;
  for (const auto& r : read_rows(dir / "fig1.csv")) {
    const std::pair<int, int> key{std::stoi(r[0]), std::stoi(r[1])};
    steps[key].push_back(std::stod(r[3]));
    gains[key].push_back(std::stod(r[4]));
  }
  bool ok = true;
  std::string detail;
  for (int batch : c.fig1.batches) {
    detail += fmt("batch %d:", batch);
    double prev_steps = INFINITY, prev_gain = -INFINITY;
    for (int n : c.fig1.actions) {
      const double med = median(steps[{batch, n}]);
      const auto& g = gains[{batch, n}];
      const double mean_gain = std::accumulate(g.begin(), g.end(), 0.0) / static_cast<double>(g.size());
      detail += fmt(" N=%d median %.0f gain %.3f;", n, med, mean_gain);
      if ((batch == 32 || batch == 128) && med > prev_steps) ok = false;
      if (mean_gain < prev_gain) ok = false;
      prev_steps = med;
      prev_gain = mean_gain;
    }
    detail += " ";
  }
  return {ok, detail + fmt("(%zu seeds)", c.seeds.size())};
}

// ---------------------------------------------------------------- A7

spg::Batch single(std::vector<double> obs, const envs::Action& a, double q) {
  spg::Batch b;
  envs::Transition t;
  t.state = std::move(obs);
  t.action = a;
  t.next_state = t.state;
  b.transitions.push_back(t);
  b.time_index = {0};
  b.values = {0.0};
  b.next_values = {0.0};
  b.log_probs = {0.0};
  b.lambda_returns = {q};
  b.advantages = {q};
  b.extras = {{}};
  return b;
}

VectorXd as_vector(const ndiff::ParamVector& p) {
  return Eigen::Map<const VectorXd>(p.values().data(), static_cast<Eigen::Index>(p.size()));
}

// Gradient term of the estimator at one (obs, action, q) sample.
VectorXd measured_term(const spg::Policy& pol, const std::vector<double>& obs, const envs::Action& a, double q) {
  return as_vector(spg::estimate_spg(single(obs, a, q), pol, false, 1.0).grad);
}

Verdict a7(const Options&) {
  Rng rng(7);
  double worst_ma = 0.0, worst_expected = 0.0;
  std::vector<spg::Policy> policies;
  std::vector<envs::PolicyValues> values;
  std::vector<testing::TabularCase> cases;
  for (int i = 0; i < 20; ++i) {
    auto c = testing::fleet_case(i);
    const int S = c.mdp.n_states, A = c.mdp.n_actions;
    spg::PolicySpec spec;
    spec.obs_dim = S;
    spec.space.discrete = true;
    spec.space.n = A;
    spec.hidden = {8};
    spg::Policy pol(spec);
    pol.init(rng);
    for (double& v : pol.params().values()) v += rng.normal(0.0, 0.3);
    MatrixXd pi(S, A);
    for (int s = 0; s < S; ++s) {
      std::vector<double> obs(static_cast<std::size_t>(S), 0.0);
      obs[static_cast<std::size_t>(s)] = 1.0;
      const auto pr = pol.probabilities(obs);
      for (int a = 0; a < A; ++a) pi(s, a) = pr[static_cast<std::size_t>(a)];
    }
    const envs::PolicyValues pv = envs::evaluate_policy(c.mdp, pi);
    const VectorXd d = envs::stationary_distribution(c.mdp, pi);

    // MA path: the same real state, Q replaced by Q - eps.
    VectorXd expected_measured = VectorXd::Zero(static_cast<Eigen::Index>(pol.params().size()));
    VectorXd expected_formula = expected_measured;
    for (int s = 0; s < S; ++s) {
      std::vector<double> obs(static_cast<std::size_t>(S), 0.0);
      obs[static_cast<std::size_t>(s)] = 1.0;
      for (int a = 0; a < A; ++a) {
        const envs::Action act = envs::Action::discrete(a);
        const double q = pv.q(s, a), q_hat = q - rng.normal(0.0, 0.5);
        const VectorXd measured = measured_term(pol, obs, act, q) - measured_term(pol, obs, act, q_hat);
        const dynamics::BiasBound b{as_vector(pol.grad_log_prob(obs, act)), q, q_hat, 0.0, 0.0};
        const VectorXd formula = dynamics::bias_bounds(b).ma_bias;
        worst_ma = std::max(worst_ma, max_abs(measured - formula));
        expected_measured += d(s) * pi(s, a) * measured;
        expected_formula += d(s) * pi(s, a) * formula;
      }
    }
    worst_expected = std::max(worst_expected, max_abs(expected_measured - expected_formula));
    policies.push_back(std::move(pol));
    values.push_back(pv);
    cases.push_back(std::move(c));
  }

  // MS path: gradient taken at a simulated state s* near the real one-hot state.
  // K is the largest observed |f(x) - f(y)|_inf / |x - y| over random pairs near
  // the one-hot states, an empirical Lipschitz norm of f on that region.
  std::vector<double> lipschitz(cases.size(), 0.0);
  for (std::size_t i = 0; i < cases.size(); ++i) {
    const int S = cases[i].mdp.n_states, A = cases[i].mdp.n_actions;
    for (int k = 0; k < 400; ++k) {
      std::vector<double> x(static_cast<std::size_t>(S), 0.0), y;
      x[rng.index(static_cast<std::size_t>(S))] = 1.0;
      for (double& v : x) v += rng.normal(0.0, 0.2);
      y = x;
      double dist = 0.0;
      for (double& v : y) {
        const double e = rng.normal(0.0, 0.2);
        v += e;
        dist += e * e;
      }
      const envs::Action act = envs::Action::discrete(static_cast<int>(rng.index(static_cast<std::size_t>(A))));
      const VectorXd diff = as_vector(policies[i].grad_log_prob(x, act)) - as_vector(policies[i].grad_log_prob(y, act));
      lipschitz[i] = std::max(lipschitz[i], max_abs(diff) / std::sqrt(dist));
    }
  }
  long entries = 0, violations = 0, cases_done = 0, excluded = 0, attempts = 0;
  long premise_held = 0, small_q_hat = 0;
  double worst_excess = 0.0;
  while (cases_done < 10000 && attempts < 1000000) {
    ++attempts;
    const std::size_t i = rng.index(cases.size());
    const int S = cases[i].mdp.n_states, A = cases[i].mdp.n_actions;
    const int s = static_cast<int>(rng.index(static_cast<std::size_t>(S)));
    const int a = static_cast<int>(rng.index(static_cast<std::size_t>(A)));
    std::vector<double> obs(static_cast<std::size_t>(S), 0.0), sim;
    obs[static_cast<std::size_t>(s)] = 1.0;
    sim = obs;
    const double scale = rng.uniform(0.0, 0.2);
    double err = 0.0;
    for (double& v : sim) {
      const double e = rng.normal(0.0, scale);
      v += e;
      err += e * e;
    }
    err = std::sqrt(err);
    const envs::Action act = envs::Action::discrete(a);
    const double q = values[i].q(s, a), q_hat = q - rng.normal(0.0, 0.5);
    const dynamics::BiasBound b{as_vector(policies[i].grad_log_prob(obs, act)), q, q_hat, lipschitz[i], err};
    const dynamics::BiasBoundResult r = dynamics::bias_bounds(b);
    if (r.excluded_count > 0) {
      excluded += r.excluded_count;
      continue;  // only cases whose radicand is nonnegative everywhere
    }
    ++cases_done;
    const VectorXd measured = measured_term(policies[i], obs, act, q) - measured_term(policies[i], sim, act, q_hat);
    const VectorXd shift = as_vector(policies[i].grad_log_prob(obs, act)) - as_vector(policies[i].grad_log_prob(sim, act));
    for (Eigen::Index p = 0; p < measured.size(); ++p) {
      ++entries;
      const double excess = measured(p) - r.ms_bias_upper(p);
      if (excess > 1e-12) {
        ++violations;
        worst_excess = std::max(worst_excess, excess);
        premise_held += std::abs(shift(p)) <= lipschitz[i] * err;
        small_q_hat += std::abs(q_hat) <= 1.0;
      }
    }
  }
  const bool ma_ok = worst_ma < 1e-8 && worst_expected < 1e-8;
  const bool ms_ok = cases_done == 10000 && violations == 0;
  return {ma_ok && ms_ok,
          fmt("MA: max |measured - f(Q-Qhat)| %.3g per pair, %.3g in expectation (< 1e-8); MS: %ld/%ld parameter "
              "entries above the upper bound over %ld cases (worst excess %.3g; the Lipschitz premise held in %ld of them, "
              "|Qhat| <= 1 in %ld; %ld entries skipped for a negative radicand)",
              worst_ma, worst_expected, violations, entries, cases_done, worst_excess, premise_held, small_q_hat,
              excluded)};
}

// ---------------------------------------------------------------- A8

Verdict a8(const Options& o) {
  const cli::ExperimentConfig c = load(o, "probe.ini");
  const fs::path dir = o.out / "probe";
  run_or_throw(c, dir);
  std::map<int, std::map<std::string, std::pair<double, double>>> by_checkpoint;
  for (const auto& r : read_rows(dir / "bias_variance.csv"))
    by_checkpoint[std::stoi(r[0])][r[1]] = {std::stod(r[2]), std::stod(r[3])};
  int n = 0, mbma_vs_qma = 0, mbma_vs_mbpo = 0, mbma_var = 0, mbpo_var = 0;
  for (const auto& [k, m] : by_checkpoint) {
    if (!m.count("AC") || !m.count("QMA") || !m.count("MBMA") || !m.count("MBPO")) continue;
    ++n;
    mbma_vs_qma += m.at("MBMA").first < m.at("QMA").first;
    mbma_vs_mbpo += m.at("MBMA").first <= m.at("MBPO").first;
    mbma_var += m.at("MBMA").second < m.at("AC").second;
    mbpo_var += m.at("MBPO").second < m.at("AC").second;
  }
  auto frac = [n](int k) { return n == 0 ? 0.0 : static_cast<double>(k) / n; };
  const bool ok = n > 0 && frac(mbma_vs_qma) >= 0.7 && frac(mbma_vs_mbpo) >= 0.6 && frac(mbma_var) >= 0.7 &&
                  frac(mbpo_var) >= 0.7;
  return {ok, fmt("over %d checkpoints: bias MBMA<QMA %.2f (>= 0.70), MBMA<=MBPO %.2f (>= 0.60); variance below AC: "
                  "MBMA %.2f, MBPO %.2f (>= 0.70); probe_batch %d, %d estimates",
                  n, frac(mbma_vs_qma), frac(mbma_vs_mbpo), frac(mbma_var), frac(mbpo_var),
                  c.probe.probe.probe_batch, c.probe.probe.n_estimates)};
}

// ---------------------------------------------------------------- A9

Verdict a9(const Options& o) {
  // Same seed, X = 0: every variant must take identical steps.
  int mismatches = 0;
  std::vector<ndiff::ParamVector> reference;
  for (auto m : {spg::Method::ppo, spg::Method::qma, spg::Method::mbma, spg::Method::mbpo}) {
    agents::AgentConfig cfg;
    cfg.variant = m;
    cfg.batch = 256;
    cfg.extra = 0;
    envs::CartPole env(3);
    agents::Agent agent(env, cfg, 1234);
    agents::Collector col(env);
    std::vector<ndiff::ParamVector> path;
    for (int u = 0; u < 3; ++u) {
      const auto b = col.collect(agent.policy(), agent.critic(), cfg.batch, cfg.gamma, cfg.lam, agent.collect_rng());
      agent.update(b, 0);
      path.push_back(agent.policy().params());
      path.push_back(agent.critic().params());
    }
    if (reference.empty())
      reference = path;
    else
      for (std::size_t i = 0; i < path.size(); ++i) mismatches += !(path[i] == reference[i]);
  }

  // Every experiment kind run twice with the same master seed, different worker counts.
  const std::vector<std::pair<std::string, std::string>> runs = {
      {"theory", "kind = theory\nseeds = 0, 1\nmaster_seed = 9\n[theory]\nmdps = 10\nhorizons = 4, 8\n"},
      {"fig1", "kind = fig1\nseeds = 0, 1\nmaster_seed = 9\n[fig1]\nbatches = 32\nactions = 1, 2\nmax_steps = 3000\n"},
      {"agents", "kind = agents\nenv = pointmass\nseeds = 0\nmaster_seed = 9\n[agent]\nbatch = 256\nextra = 2\n"
                 "dynamics_steps = 20\nq_epochs = 2\n[agents]\ntotal_steps = 1024\n"},
      {"probe", "kind = probe\nenv = pointmass\nseeds = 0\nmaster_seed = 9\n[agent]\nbatch = 256\n"
                "dynamics_steps = 20\nq_epochs = 2\n[probe]\nn_estimates = 4\nprobe_batch = 64\nn_checkpoints = 2\n"
                "total_steps = 1024\n"}};
  const std::map<std::string, std::string> files = {
      {"theory", "theory.csv"}, {"fig1", "fig1.csv"}, {"agents", "curves.csv"}, {"probe", "bias_variance.csv"}};
  int identical = 0;
  std::string which;
  for (const auto& [name, text] : runs) {
    const auto parsed = cli::parse_config(text);
    if (!parsed.ok()) return {false, name + ": " + cli::format(parsed.diagnostics.front())};
    const fs::path a = o.out / "determinism" / (name + "_a"), b = o.out / "determinism" / (name + "_b");
    if (cli::run_experiment(*parsed.config, {a.string(), 1, 0}).exit_code != 0 ||
        cli::run_experiment(*parsed.config, {b.string(), 2, 0}).exit_code != 0)
      return {false, name + " run failed"};
    const std::string fa = slurp(a / files.at(name)), fb = slurp(b / files.at(name));
    if (!fa.empty() && fa == fb)
      ++identical;
    else
      which += " " + name;
  }
  return {mismatches == 0 && identical == 4,
          fmt("X=0 variants: %d mismatching parameter snapshots over 3 updates; byte-identical reruns %d/4%s", mismatches,
              identical, which.empty() ? "" : (" (differs:" + which + ")").c_str())};
}

}  // namespace

int main(int argc, char** argv) {
  const std::map<std::string, std::function<Verdict(const Options&)>> criteria = {
      {"A1", a1}, {"A2", a2}, {"A3", a3}, {"A4", a4}, {"A5", a5}, {"A6", a6}, {"A7", a7}, {"A8", a8}, {"A9", a9}};
  Options options;
  bool strict = false;
  std::vector<std::string> selected;
  for (int i = 1; i < argc; ++i) {
    const std::string arg = argv[i];
    if (arg == "--strict")
      strict = true;
    else if (arg == "--out" && i + 1 < argc)
      options.out = argv[++i];
    else if (arg == "--configs" && i + 1 < argc)
      options.configs = argv[++i];
    else if (arg == "all")
      for (const auto& [k, v] : criteria) selected.push_back(k);
    else if (criteria.count(arg))
      selected.push_back(arg);
    else {
      std::fprintf(stderr, "usage: pgvlab_acceptance [--out DIR] [--configs DIR] [--strict] all|A1..A9...\n");
      return 2;
    }
  }
  if (selected.empty())
    for (const auto& [k, v] : criteria) selected.push_back(k);

  int failed = 0;
  for (const auto& id : selected) {
    const auto t0 = std::chrono::steady_clock::now();
    Verdict v;
    try {
      v = criteria.at(id)(options);
    } catch (const std::exception& e) {
      std::printf("%s ERROR %s\n", id.c_str(), e.what());
      return 2;
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("%s %s  %s  (%.1fs)\n", id.c_str(), v.pass ? "PASS" : "FAIL", v.detail.c_str(), secs);
    std::fflush(stdout);
    failed += !v.pass;
  }
  return strict && failed > 0 ? 1 : 0;
}
