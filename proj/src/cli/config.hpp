#pragma once

#include "agents/config.hpp"
#include "agents/fig1.hpp"
#include "probe/probe.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace pgvlab::cli {

struct TheoryConfig {
  int mdps = 20;  // per seed
  int min_states = 2;
  int max_states = 5;
  int min_actions = 2;
  int max_actions = 3;
  double mixing_low = 0.2;
  double mixing_high = 1.0;
  double reward_scale = 1.0;
  double gamma = 0.9;
  double logit_scale = 1.0;
  double weight_discount = 1.0;
  std::vector<int> horizons = {4, 8, 16};
  std::vector<int> actions = {1, 2, 4, 8};
  std::vector<double> deltas = {1.0};
};

struct Fig1Grid {
  std::vector<int> batches = {32, 128, 512};
  std::vector<int> actions = {1, 2, 4};
  agents::Fig1Config cell;
};

struct AgentsRun {
  std::vector<spg::Method> variants = {spg::Method::ppo, spg::Method::qma, spg::Method::mbma, spg::Method::mbpo};
  long total_steps = 200000;
};

struct ProbeRun {
  probe::ProbeConfig probe;
  long total_steps = 200000;
};

enum class Kind { theory, fig1, agents, probe };
std::string kind_name(Kind k);

struct ExperimentConfig {
  Kind kind = Kind::theory;
  std::string env = "cartpole";
  std::vector<long> seeds;
  std::uint64_t master_seed = 0;
  std::string out = "results";
  TheoryConfig theory;
  Fig1Grid fig1;
  agents::AgentConfig agent;
  AgentsRun agents;
  ProbeRun probe;
  /// Canonical "section.key" -> value text of every assignment, for hashing.
  std::map<std::string, std::string> entries;
};

struct Diagnostic {
  int line = 0;  // 0 when not tied to a line
  std::string message;
};

std::string format(const Diagnostic& d);

struct ParseResult {
  std::optional<ExperimentConfig> config;  // set only when there are no diagnostics
  std::vector<Diagnostic> diagnostics;
  bool ok() const { return diagnostics.empty(); }
};

/// Flat INI-style text: "key = value" lines, optional [section] headers
/// (theory, fig1, agent, agents, probe), '#' or ';' comments, comma-separated
/// lists. Unknown keys, malformed values and out-of-range values are reported
/// with their line; nothing throws.
ParseResult parse_config(const std::string& text);
ParseResult load_config(const std::string& path);

/// Nearest valid key of `section` for an unknown key, or empty.
std::string suggest_key(const std::string& section, const std::string& key);

/// FNV-1a over the sorted canonical entries; independent of line order.
std::uint64_t config_hash(const ExperimentConfig& c);

}  // namespace pgvlab::cli
