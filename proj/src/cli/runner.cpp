#include "cli/runner.hpp"

#include "agents/fig1.hpp"
#include "agents/trainer.hpp"
#include "common/interrupt.hpp"
#include "common/rng.hpp"
#include "common/version.hpp"
#include "envs/tabular_mdp.hpp"
#include "probe/probe.hpp"
#include "variance/reports.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <functional>
#include <mutex>
#include <optional>
#include <thread>

namespace pgvlab::cli {

namespace {

std::string num(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

template <typename... Ts>
std::string row(const Ts&... fields) {
  std::string out;
  auto put = [&out](const auto& f) {
    if (!out.empty()) out += ',';
    using F = std::decay_t<decltype(f)>;
    if constexpr (std::is_same_v<F, std::string> || std::is_same_v<F, const char*>)
      out += f;
    else if constexpr (std::is_floating_point_v<F>)
      out += num(f);
    else
      out += std::to_string(f);
  };
  (put(fields), ...);
  return out;
}

class CsvFile {
 public:
  CsvFile(const std::filesystem::path& path, const std::string& header) : path_(path) {
    file_ = std::fopen(path.string().c_str(), "wb");
    if (file_ == nullptr) throw IoError("cannot open '" + path.string() + "' for writing");
    write("# schema=v1");
    write(header);
  }
  CsvFile(const CsvFile&) = delete;
  CsvFile& operator=(const CsvFile&) = delete;
  ~CsvFile() {
    if (file_ != nullptr) std::fclose(file_);
  }

  // One write per row, flushed, so a killed run leaves whole lines behind.
  void write(const std::string& line) {
    const std::string text = line + "\n";
    if (std::fwrite(text.data(), 1, text.size(), file_) != text.size() || std::fflush(file_) != 0)
      throw IoError("write failed on '" + path_.string() + "'");
  }

 private:
  std::filesystem::path path_;
  std::FILE* file_ = nullptr;
};

struct Unit {
  std::string label;
  long seed = 0;
  std::function<std::vector<std::string>()> work;
};

struct UnitResult {
  enum class Status { pending, ok, failed, interrupted } status = Status::pending;
  std::vector<std::string> rows;
  std::string error;
  double seconds = 0.0;
  bool committed = false;
};

std::uint64_t unit_seed(const ExperimentConfig& c, long seed) {
  return derive_seed(c.master_seed, static_cast<std::uint64_t>(seed));
}

std::vector<std::string> theory_rows(const ExperimentConfig& c, long seed, int index) {
  const TheoryConfig& t = c.theory;
  const std::uint64_t mdp_seed = theory_mdp_seed(c.master_seed, seed, index);
  const TheoryCase tc = make_theory_case(t, mdp_seed);
  const envs::TabularMDP& mdp = tc.mdp;
  const Eigen::MatrixXd& logits = tc.logits;
  const int S = mdp.n_states, A = mdp.n_actions;

  std::vector<std::string> rows;
  for (int T : t.horizons) {
    throw_if_interrupted();
    const variance::Moments m = variance::exact_moments(mdp, logits, T - 1, t.weight_discount);
    for (int N : t.actions) {
      const variance::VarianceReport v = variance::clt_variance(m, T, N);
      for (double delta : t.deltas) {
        const variance::DeltaReport d = variance::delta_reports(m, T, N, delta);
        const variance::Optimality o = variance::ma_optimality(m, T, N, delta);
        const bool matches = o.ma_preferred == (d.delta_t_mean() >= d.delta_n_mean());
        rows.push_back(row(std::to_string(mdp_seed), S, A, T, N, delta, v.total_mean(), v.marginalized_mean(),
                           v.policy_dependent_mean(), d.delta_n_mean(), d.delta_t_mean(), o.lhs, o.rhs,
                           int{o.ma_preferred}, int{matches}));
      }
    }
  }
  return rows;
}

struct Plan {
  std::string file;
  std::string header;
  std::vector<Unit> units;
};

Plan plan(const ExperimentConfig& c, long offset) {
  Plan p;
  std::vector<long> seeds;
  for (long s : c.seeds) seeds.push_back(s + offset);
  switch (c.kind) {
    case Kind::theory:
      p.file = "theory.csv";
      p.header =
          "mdp_seed,S,A,T,N,delta,var_total,var_marg,var_poldep,delta_N,delta_T,thm_lhs,thm_rhs,ma_preferred,"
          "verdict_matches";
      for (long seed : seeds)
        for (int i = 0; i < c.theory.mdps; ++i)
          p.units.push_back({"mdp " + std::to_string(i), seed, [&c, seed, i] { return theory_rows(c, seed, i); }});
      break;
    case Kind::fig1:
      p.file = "fig1.csv";
      p.header = "batch,N,seed,steps_to_solve,mean_update_gain";
      for (int batch : c.fig1.batches)
        for (int n : c.fig1.actions)
          for (long seed : seeds)
            p.units.push_back({"batch " + std::to_string(batch) + " N " + std::to_string(n), seed, [&c, batch, n, seed] {
                                 agents::Fig1Config cell = c.fig1.cell;
                                 cell.batch = batch;
                                 cell.n_actions = n;
                                 const agents::Fig1Result r = agents::run_fig1_cell(cell, unit_seed(c, seed));
                                 const double steps = r.steps_to_solve ? static_cast<double>(*r.steps_to_solve)
                                                                       : std::numeric_limits<double>::infinity();
                                 return std::vector<std::string>{row(batch, n, seed, steps, r.mean_update_gain)};
                               }});
      break;
    case Kind::agents:
      p.file = "curves.csv";
      p.header = "variant,seed,step,eval_return";
      for (spg::Method variant : c.agents.variants)
        for (long seed : seeds)
          p.units.push_back({spg::method_name(variant), seed, [&c, variant, seed] {
                               agents::AgentConfig cfg = c.agent;
                               cfg.variant = variant;
                               const auto result = agents::run_training(c.env, cfg, unit_seed(c, seed), c.agents.total_steps);
                               std::vector<std::string> rows;
                               for (const auto& point : result.curve)
                                 rows.push_back(row(spg::method_name(variant), seed, point.step, point.eval_return));
                               return rows;
                             }});
      break;
    case Kind::probe:
      p.file = "bias_variance.csv";
      p.header = "checkpoint,method,rel_bias,rel_var,mean_grad_norm,excluded_params";
      for (std::size_t j = 0; j < seeds.size(); ++j) {
        const long seed = seeds[j];
        // Checkpoints of later seeds continue the numbering.
        const int base = static_cast<int>(j) * c.probe.probe.n_checkpoints;
        p.units.push_back({"probe", seed, [&c, seed, base] {
                             std::vector<std::string> rows;
                             for (const auto& r : probe::run_probe(c.env, c.probe.probe, c.agent, unit_seed(c, seed),
                                                                   c.probe.total_steps))
                               rows.push_back(row(base + r.checkpoint, spg::method_name(r.method), r.rel_bias,
                                                  r.rel_var, r.mean_grad_norm, r.excluded_params));
                             return rows;
                           }});
      }
      break;
  }
  return p;
}

std::string timestamp() {
  const std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string status_name(UnitResult::Status s) {
  switch (s) {
    case UnitResult::Status::ok: return "ok";
    case UnitResult::Status::failed: return "failed";
    case UnitResult::Status::interrupted: return "interrupted";
    case UnitResult::Status::pending: return "not_run";
  }
  return "?";
}

std::string csv_text(std::string s) {
  std::replace(s.begin(), s.end(), ',', ';');
  std::replace(s.begin(), s.end(), '\n', ' ');
  return s;
}

}  // namespace

std::uint64_t theory_mdp_seed(std::uint64_t master_seed, long seed, int index) {
  return derive_seed(derive_seed(master_seed, static_cast<std::uint64_t>(seed)), 1000 + static_cast<std::uint64_t>(index));
}

TheoryCase make_theory_case(const TheoryConfig& t, std::uint64_t mdp_seed) {
  Rng rng(mdp_seed);
  const int S = t.min_states + static_cast<int>(rng.index(static_cast<std::size_t>(t.max_states - t.min_states + 1)));
  const int A =
      t.min_actions + static_cast<int>(rng.index(static_cast<std::size_t>(t.max_actions - t.min_actions + 1)));
  const double mixing = rng.uniform(t.mixing_low, t.mixing_high);
  TheoryCase tc{envs::generate_random_mdp(rng.next_u64(), S, A, t.reward_scale, mixing, t.gamma), {}};
  tc.logits.resize(S, A);
  for (int s = 0; s < S; ++s)
    for (int a = 0; a < A; ++a) tc.logits(s, a) = rng.normal(0.0, t.logit_scale);
  return tc;
}

int effective_workers(int requested, int units) {
  int n = requested > 0 ? requested : static_cast<int>(std::max(1U, std::thread::hardware_concurrency()));
  if (const char* cap = std::getenv("PGVLAB_THREADS")) {
    const int c = std::atoi(cap);
    if (c > 0) n = std::min(n, c);
  }
  return std::max(1, std::min(n, std::max(units, 1)));
}

RunOutcome run_experiment(const ExperimentConfig& config, const RunOptions& options) {
  RunOutcome outcome;
  const auto started = std::chrono::steady_clock::now();
  const std::filesystem::path dir = options.out_dir.empty() ? config.out : options.out_dir;
  try {
    std::filesystem::create_directories(dir);
  } catch (const std::exception& e) {
    outcome.exit_code = kExitConfig;
    outcome.message = "output directory '" + dir.string() + "' is not writable: " + e.what();
    return outcome;
  }

  Plan p = plan(config, options.seed_offset);
  outcome.units = static_cast<int>(p.units.size());
  std::optional<CsvFile> data, record;
  try {
    data.emplace(dir / p.file, p.header);
    record.emplace(dir / "run_record.csv", "config_hash,version,kind,unit,seed,outcome,rows,seconds,finished_at");
  } catch (const IoError& e) {
    outcome.exit_code = kExitConfig;
    outcome.message = e.what();
    return outcome;
  }

  char hash[20];
  std::snprintf(hash, sizeof hash, "%016llx", static_cast<unsigned long long>(config_hash(config)));
  std::vector<UnitResult> results(p.units.size());
  std::mutex mu;
  std::size_t next_unit = 0, next_commit = 0;
  std::string io_error;

  // Caller holds mu. Units leave in index order; a gap stops the stream.
  auto commit = [&](std::size_t i) {
    UnitResult& r = results[i];
    r.committed = true;
    if (r.status == UnitResult::Status::ok)
      for (const auto& line : r.rows) data->write(line);
    record->write(row(std::string(hash), std::string(kVersion), kind_name(config.kind), csv_text(p.units[i].label),
                      p.units[i].seed, status_name(r.status) + (r.error.empty() ? "" : ": " + csv_text(r.error)),
                      static_cast<long>(r.rows.size()), r.seconds, timestamp()));
  };
  auto drain = [&] {
    while (next_commit < results.size() && results[next_commit].status != UnitResult::Status::pending)
      commit(next_commit++);
  };

  auto worker = [&] {
    for (;;) {
      std::size_t i;
      {
        std::lock_guard lock(mu);
        if (next_unit >= p.units.size() || interrupt_requested() || !io_error.empty()) return;
        i = next_unit++;
      }
      UnitResult r;
      const auto t0 = std::chrono::steady_clock::now();
      try {
        r.rows = p.units[i].work();
        r.status = UnitResult::Status::ok;
      } catch (const InterruptedError&) {
        r.status = UnitResult::Status::interrupted;
      } catch (const std::exception& e) {
        r.status = UnitResult::Status::failed;
        r.error = e.what();
      }
      if (r.status != UnitResult::Status::ok) r.rows.clear();
      r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      std::lock_guard lock(mu);
      results[i] = std::move(r);
      try {
        drain();
      } catch (const IoError& e) {
        io_error = e.what();
      }
    }
  };

  const int n = effective_workers(options.workers, outcome.units);
  std::vector<std::thread> pool;
  for (int k = 1; k < n; ++k) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  // Whatever finished behind an interrupted or unstarted unit is still written, in order.
  try {
    drain();
    for (std::size_t i = next_commit; i < results.size(); ++i)
      if (!results[i].committed) commit(i);
  } catch (const IoError& e) {
    if (io_error.empty()) io_error = e.what();
  }

  bool interrupted = false;
  for (std::size_t i = 0; i < results.size(); ++i) {
    const UnitResult& r = results[i];
    if (r.status == UnitResult::Status::ok) ++outcome.completed;
    if (r.status == UnitResult::Status::interrupted || r.status == UnitResult::Status::pending) interrupted = true;
    if (r.status == UnitResult::Status::failed && outcome.message.empty())
      outcome.message = p.units[i].label + " (seed " + std::to_string(p.units[i].seed) + "): " + r.error;
  }
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  try {
    record->write(row(std::string(hash), std::string(kVersion), kind_name(config.kind), std::string("total"), 0L,
                      std::string(interrupted ? "interrupted" : "done"), static_cast<long>(outcome.completed), wall,
                      timestamp()));
  } catch (const IoError& e) {
    if (io_error.empty()) io_error = e.what();
  }

  if (!io_error.empty()) {
    outcome.exit_code = kExitRuntime;
    outcome.message = io_error;
  } else if (interrupted && interrupt_requested()) {
    outcome.exit_code = kExitInterrupted;
    if (outcome.message.empty()) outcome.message = "interrupted";
  } else if (!outcome.message.empty() || outcome.completed < outcome.units) {
    outcome.exit_code = kExitRuntime;
  }
  return outcome;
}

}  // namespace pgvlab::cli
