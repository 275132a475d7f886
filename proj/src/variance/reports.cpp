#include "variance/reports.hpp"

#include "common/error.hpp"

#include <cmath>

namespace pgvlab::variance {

namespace {

void check_horizon(const Moments& m, int T, int N) {
  require(T >= 1, "variance: T must be >= 1");
  require(N >= 1, "variance: N must be >= 1");
  require(m.max_lag >= T - 1, "variance: moments do not reach lag T-1");
}

VectorXd weighted_lags(const std::vector<VectorXd>& lags, int T, std::size_t P) {
  VectorXd acc = VectorXd::Zero(static_cast<Eigen::Index>(P));
  for (int t = 1; t < T; ++t) acc += 2.0 * (T - t) / static_cast<double>(T) * lags[static_cast<std::size_t>(t)];
  return acc;
}

}  // namespace

VarianceReport clt_variance(const Moments& m, int T, int N) {
  check_horizon(m, T, N);
  const auto P = static_cast<std::size_t>(m.parameter_count());
  VarianceReport r;
  r.T = T;
  r.N = N;
  r.marginalized = m.var_s + weighted_lags(m.alpha_e, T, P);
  r.policy_dependent = (m.evar_a + weighted_lags(m.e_alpha, T, P)) / static_cast<double>(N);
  r.total = (r.marginalized + r.policy_dependent) / static_cast<double>(T);
  for (int t = 1; t < T; ++t) {
    r.cov_trace.push_back(param_mean(m.single_action_covariance(t)));
    r.cov_bar_trace.push_back(param_mean(m.alpha_e[static_cast<std::size_t>(t)]));
  }
  return r;
}

DeltaReport delta_reports(const Moments& m, int T, int N, double delta) {
  check_horizon(m, T, N);
  require(delta > 0.0, "delta_reports: delta must be > 0");
  const auto P = static_cast<std::size_t>(m.parameter_count());
  const double Td = static_cast<double>(T);
  const double extended = Td + delta * Td;
  DeltaReport r;
  r.T = T;
  r.N = N;
  r.delta = delta;
  r.alpha_n = -1.0 / (Td * (static_cast<double>(N) * N + N));
  r.alpha_t = -delta / extended;

  r.delta_n = r.alpha_n * (m.evar_a + weighted_lags(m.e_alpha, T, P));

  VectorXd bracket = m.var_s + m.evar_a / static_cast<double>(N);
  for (int t = 1; t < T; ++t)
    bracket += 2.0 * ((T - t) / Td - t / extended) * m.lag_covariance(t, N);
  r.delta_t = r.alpha_t * bracket;

  const double rounded = std::round(delta * Td);
  const int t_ext = T + static_cast<int>(rounded);
  if (std::abs(rounded - delta * Td) < 1e-9 && m.max_lag >= t_ext - 1) {
    VectorXd tail = VectorXd::Zero(static_cast<Eigen::Index>(P));
    for (int k = T; k < t_ext; ++k) tail += 2.0 * (t_ext - k) / (extended * extended) * m.lag_covariance(k, N);
    r.tail = tail;
  }
  return r;
}

Optimality ma_optimality(const Moments& m, int T, int N, double delta) {
  check_horizon(m, T, N);
  require(delta > 0.0, "ma_optimality: delta must be > 0");
  const double Td = static_cast<double>(T);
  const double Nd = static_cast<double>(N);
  const double nn = Nd * Nd + Nd;
  const double extended = Td + delta * Td;

  Optimality o;
  o.lhs_params = (1.0 - delta * Nd) / (delta * nn) * m.evar_a;
  o.rhs_params = m.var_s;
  const double a = 1.0 + delta - delta * Nd - delta * delta * Nd;
  const double b = 1.0 - 2.0 * delta * Nd - delta * delta * Nd;
  const double denom = (delta * Td + delta * delta * Td) * nn;
  for (int t = 1; t < T; ++t) {
    const auto ts = static_cast<std::size_t>(t);
    o.lhs_params += 2.0 * (a * Td - b * t) / denom * m.e_alpha[ts];
    o.rhs_params += 2.0 * ((T - t) / Td - t / extended) * m.alpha_e[ts];
  }
  o.lhs = param_mean(o.lhs_params);
  o.rhs = param_mean(o.rhs_params);
  o.ma_preferred = o.lhs >= o.rhs;

  if (N == 1 && delta == 1.0) {
    double lhs = 0.0;
    double rhs = param_mean(m.var_s);
    for (int t = 1; t < T; ++t) {
      lhs += t / Td * param_mean(m.lag_covariance(t, 1));
      rhs += 2.0 * (T - t) / Td * param_mean(m.alpha_e[static_cast<std::size_t>(t)]);
    }
    o.special_lhs = lhs;
    o.special_rhs = rhs;
  }
  return o;
}

double McDecomposition::policy_share() const {
  const double total = var_s_mean + evar_a_mean;
  return total > 0.0 ? evar_a_mean / total : 0.0;
}

McDecomposition mc_decomposition(const std::vector<MatrixXd>& terms) {
  if (static_cast<int>(terms.size()) < kMinDecompositionSamples)
    throw DegenerateInputError("mc_decomposition: need at least " + std::to_string(kMinDecompositionSamples) +
                               " sampled states, got " + std::to_string(terms.size()));
  const Eigen::Index K = terms.front().rows();
  const Eigen::Index P = terms.front().cols();
  require(K >= 2, "mc_decomposition: need at least two actions per state");
  const double M = static_cast<double>(terms.size());
  const double Kd = static_cast<double>(K);

  MatrixXd bars(static_cast<Eigen::Index>(terms.size()), P);
  MatrixXd within(static_cast<Eigen::Index>(terms.size()), P);
  VectorXd pooled_sum = VectorXd::Zero(P);
  VectorXd pooled_sq = VectorXd::Zero(P);
  for (std::size_t i = 0; i < terms.size(); ++i) {
    const MatrixXd& x = terms[i];
    require_shape(x.rows() == K && x.cols() == P, "mc_decomposition: ragged samples");
    const VectorXd mean = x.colwise().mean().transpose();
    bars.row(static_cast<Eigen::Index>(i)) = mean.transpose();
    within.row(static_cast<Eigen::Index>(i)) =
        ((x.rowwise() - mean.transpose()).array().square().colwise().sum() / (Kd - 1.0)).matrix();
    pooled_sum += x.colwise().sum().transpose();
    pooled_sq += x.array().square().colwise().sum().matrix().transpose();
  }

  McDecomposition out;
  out.samples = static_cast<int>(terms.size());
  out.actions_per_state = static_cast<int>(K);
  out.evar_a = within.colwise().mean().transpose();
  const VectorXd grand = bars.colwise().mean().transpose();
  const VectorXd between = ((bars.rowwise() - grand.transpose()).array().square().colwise().sum() / (M - 1.0)).matrix().transpose();
  // The average over K actions still carries Var_a / K.
  out.var_s = between - out.evar_a / Kd;
  const double count = M * Kd;
  const VectorXd pooled_mean = pooled_sum / count;
  out.pooled = (pooled_sq - count * pooled_mean.cwiseProduct(pooled_mean)) / (count - 1.0);
  out.var_s_mean = param_mean(out.var_s);
  out.evar_a_mean = param_mean(out.evar_a);
  out.pooled_mean = param_mean(out.pooled);

  // Standard errors of the scalar reductions from per-state contributions.
  VectorXd w_i = within.rowwise().mean();
  VectorXd b_i(bars.rows());
  for (Eigen::Index i = 0; i < bars.rows(); ++i)
    b_i(i) = (bars.row(i).transpose() - grand).array().square().mean() * M / (M - 1.0) - w_i(i) / Kd;
  auto se = [&](const VectorXd& v) {
    const double mu = v.mean();
    return std::sqrt((v.array() - mu).square().sum() / (M - 1.0) / M);
  };
  out.evar_a_se = se(w_i);
  out.var_s_se = se(b_i);
  return out;
}

McDecomposition mc_decomposition(const envs::TabularMDP& mdp, const MatrixXd& logits, int samples, int K, Rng& rng) {
  if (samples < kMinDecompositionSamples)
    throw DegenerateInputError("mc_decomposition: need at least " + std::to_string(kMinDecompositionSamples) +
                               " sampled states, got " + std::to_string(samples));
  const Moments m = exact_moments(mdp, logits, 0);
  const VectorXd& d = m.stationary;
  std::vector<MatrixXd> terms;
  terms.reserve(static_cast<std::size_t>(samples));
  for (int i = 0; i < samples; ++i) {
    const int s = static_cast<int>(rng.categorical(std::span<const double>(d.data(), static_cast<std::size_t>(d.size()))));
    std::vector<double> probs(static_cast<std::size_t>(mdp.n_actions));
    for (int a = 0; a < mdp.n_actions; ++a) probs[static_cast<std::size_t>(a)] = m.policy(s, a);
    MatrixXd x(K, m.parameter_count());
    for (int k = 0; k < K; ++k) x.row(k) = m.upsilon[static_cast<std::size_t>(s)].row(static_cast<Eigen::Index>(rng.categorical(probs)));
    terms.push_back(std::move(x));
  }
  return mc_decomposition(terms);
}

}  // namespace pgvlab::variance
