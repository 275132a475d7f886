#include "cli/config.hpp"

#include "common/error.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <limits>
#include <fstream>
#include <functional>
#include <sstream>

namespace pgvlab::cli {

std::string kind_name(Kind k) {
  switch (k) {
    case Kind::theory: return "theory";
    case Kind::fig1: return "fig1";
    case Kind::agents: return "agents";
    case Kind::probe: return "probe";
  }
  return "?";
}

std::string format(const Diagnostic& d) {
  return d.line > 0 ? "line " + std::to_string(d.line) + ": " + d.message : d.message;
}

namespace {

using Error = std::optional<std::string>;

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

template <typename T>
bool parse_number(const std::string& s, T& out) {
  const char* first = s.data();
  const char* last = s.data() + s.size();
  if constexpr (std::is_floating_point_v<T>) {
    char* end = nullptr;
    out = std::strtod(first, &end);
    return end == last && !s.empty();
  } else {
    const auto r = std::from_chars(first, last, out);
    return r.ec == std::errc() && r.ptr == last;
  }
}

bool parse_bool(const std::string& s, bool& out) {
  if (s == "true" || s == "1" || s == "yes") return out = true, true;
  if (s == "false" || s == "0" || s == "no") return out = false, true;
  return false;
}

// Setters report an error message or nothing.
using Apply = std::function<Error(ExperimentConfig&, const std::string&)>;

struct KeySpec {
  std::string section;
  std::string name;
  Apply apply;
};

template <typename T>
Apply number(std::function<T&(ExperimentConfig&)> field, T lo, T hi) {
  return [field, lo, hi](ExperimentConfig& c, const std::string& v) -> Error {
    T x{};
    if (!parse_number(v, x)) return "expected a number, got '" + v + "'";
    if (!(x >= lo && x <= hi)) {
      std::ostringstream os;
      os << "value " << v << " out of range [" << lo << ", " << hi << "]";
      return os.str();
    }
    field(c) = x;
    return std::nullopt;
  };
}

template <typename T>
Apply number_list(std::function<std::vector<T>&(ExperimentConfig&)> field, T lo, T hi) {
  return [field, lo, hi](ExperimentConfig& c, const std::string& v) -> Error {
    std::vector<T> out;
    for (const auto& item : split_list(v)) {
      T x{};
      if (!parse_number(item, x)) return "expected a list of numbers, got '" + item + "'";
      if (!(x >= lo && x <= hi)) {
        std::ostringstream os;
        os << "list value " << item << " out of range [" << lo << ", " << hi << "]";
        return os.str();
      }
      out.push_back(x);
    }
    field(c) = std::move(out);
    return std::nullopt;
  };
}

Apply boolean(std::function<bool&(ExperimentConfig&)> field) {
  return [field](ExperimentConfig& c, const std::string& v) -> Error {
    if (!parse_bool(v, field(c))) return "expected true or false, got '" + v + "'";
    return std::nullopt;
  };
}

Apply method_list(std::function<std::vector<spg::Method>&(ExperimentConfig&)> field, bool training) {
  return [field, training](ExperimentConfig& c, const std::string& v) -> Error {
    std::vector<spg::Method> out;
    for (auto item : split_list(v)) {
      std::transform(item.begin(), item.end(), item.begin(), [](unsigned char ch) { return std::toupper(ch); });
      spg::Method m{};
      try {
        m = spg::parse_method(item);
      } catch (const ConfigError& e) {
        return std::string(e.what());
      }
      if (training && m == spg::Method::ac) return std::string("AC is not a training variant");
      if (!training && m == spg::Method::ppo) return std::string("PPO is not a probe method; use AC");
      if (std::find(out.begin(), out.end(), m) != out.end()) return "duplicate method '" + item + "'";
      out.push_back(m);
    }
    if (out.empty()) return std::string("empty method list");
    field(c) = std::move(out);
    return std::nullopt;
  };
}

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr int kMaxInt = std::numeric_limits<int>::max();
constexpr long kMaxLong = std::numeric_limits<long>::max();

const std::vector<KeySpec>& registry() {
  static const std::vector<KeySpec> keys = [] {
    std::vector<KeySpec> k;
    auto add = [&k](std::string section, std::string name, Apply apply) {
      k.push_back({std::move(section), std::move(name), std::move(apply)});
    };
    using C = ExperimentConfig;

    add("", "kind", [](C& c, const std::string& v) -> Error {
      for (Kind kind : {Kind::theory, Kind::fig1, Kind::agents, Kind::probe})
        if (kind_name(kind) == v) return c.kind = kind, std::nullopt;
      return "unknown kind '" + v + "' (expected theory, fig1, agents or probe)";
    });
    add("", "env", [](C& c, const std::string& v) -> Error {
      if (v != "cartpole" && v != "pointmass") return "unknown env '" + v + "' (expected cartpole or pointmass)";
      c.env = v;
      return std::nullopt;
    });
    add("", "seeds", number_list<long>([](C& c) -> std::vector<long>& { return c.seeds; }, 0L, kMaxLong));
    add("", "master_seed", [](C& c, const std::string& v) -> Error {
      std::uint64_t x = 0;
      if (!parse_number(v, x)) return "expected a non-negative integer, got '" + v + "'";
      c.master_seed = x;
      return std::nullopt;
    });
    add("", "out", [](C& c, const std::string& v) -> Error {
      if (v.empty()) return std::string("empty output directory");
      c.out = v;
      return std::nullopt;
    });

    // [theory]
    add("theory", "mdps", number<int>([](C& c) -> int& { return c.theory.mdps; }, 1, 100000));
    add("theory", "min_states", number<int>([](C& c) -> int& { return c.theory.min_states; }, 1, 64));
    add("theory", "max_states", number<int>([](C& c) -> int& { return c.theory.max_states; }, 1, 64));
    add("theory", "min_actions", number<int>([](C& c) -> int& { return c.theory.min_actions; }, 2, 64));
    add("theory", "max_actions", number<int>([](C& c) -> int& { return c.theory.max_actions; }, 2, 64));
    add("theory", "mixing_low", number<double>([](C& c) -> double& { return c.theory.mixing_low; }, 0.0, 1.0));
    add("theory", "mixing_high", number<double>([](C& c) -> double& { return c.theory.mixing_high; }, 0.0, 1.0));
    add("theory", "reward_scale", number<double>([](C& c) -> double& { return c.theory.reward_scale; }, 0.0, 1e6));
    add("theory", "gamma", number<double>([](C& c) -> double& { return c.theory.gamma; }, 0.0, 1.0));
    add("theory", "logit_scale", number<double>([](C& c) -> double& { return c.theory.logit_scale; }, 0.0, 100.0));
    add("theory", "weight_discount", number<double>([](C& c) -> double& { return c.theory.weight_discount; }, 0.0, 1.0));
    add("theory", "horizons", number_list<int>([](C& c) -> std::vector<int>& { return c.theory.horizons; }, 1, 100000));
    add("theory", "actions", number_list<int>([](C& c) -> std::vector<int>& { return c.theory.actions; }, 1, 4096));
    add("theory", "deltas", number_list<double>([](C& c) -> std::vector<double>& { return c.theory.deltas; }, 0.0, 1e6));

    // [fig1]
    add("fig1", "batches", number_list<int>([](C& c) -> std::vector<int>& { return c.fig1.batches; }, 1, 1000000));
    add("fig1", "actions", number_list<int>([](C& c) -> std::vector<int>& { return c.fig1.actions; }, 1, 64));
    add("fig1", "horizon", number<int>([](C& c) -> int& { return c.fig1.cell.horizon; }, 1, 10000));
    add("fig1", "max_steps", number<long>([](C& c) -> long& { return c.fig1.cell.max_steps; }, 1L, kMaxLong));
    add("fig1", "eval_every", number<int>([](C& c) -> int& { return c.fig1.cell.eval_every; }, 1, kMaxInt));
    add("fig1", "eval_window", number<int>([](C& c) -> int& { return c.fig1.cell.eval_window; }, 1, kMaxInt));
    add("fig1", "solve_threshold", number<double>([](C& c) -> double& { return c.fig1.cell.solve_threshold; }, -kInf, kInf));
    add("fig1", "gamma", number<double>([](C& c) -> double& { return c.fig1.cell.gamma; }, 0.0, 1.0));
    add("fig1", "lam", number<double>([](C& c) -> double& { return c.fig1.cell.lam; }, 0.0, 1.0));
    add("fig1", "hidden", number_list<int>([](C& c) -> std::vector<int>& { return c.fig1.cell.hidden; }, 1, 4096));
    add("fig1", "policy_lr", number<double>([](C& c) -> double& { return c.fig1.cell.policy_adam.lr; }, 0.0, 1.0));
    add("fig1", "critic_lr", number<double>([](C& c) -> double& { return c.fig1.cell.critic_adam.lr; }, 0.0, 1.0));
    add("fig1", "critic_epochs", number<int>([](C& c) -> int& { return c.fig1.cell.critic_epochs; }, 0, 10000));
    add("fig1", "critic_minibatch", number<int>([](C& c) -> int& { return c.fig1.cell.critic_minibatch; }, 1, kMaxInt));

    // [agent]
    add("agent", "variant", [](C& c, const std::string& v) -> Error {
      std::vector<spg::Method> one;
      if (auto e = method_list([&one](C&) -> std::vector<spg::Method>& { return one; }, true)(c, v)) return e;
      if (one.size() != 1) return std::string("expected a single variant");
      c.agent.variant = one.front();
      return std::nullopt;
    });
    add("agent", "batch", number<int>([](C& c) -> int& { return c.agent.batch; }, 1, kMaxInt));
    add("agent", "extra", number<int>([](C& c) -> int& { return c.agent.extra; }, 0, 4096));
    add("agent", "horizon", number<int>([](C& c) -> int& { return c.agent.horizon; }, 1, 10000));
    add("agent", "clip", number<double>([](C& c) -> double& { return c.agent.clip; }, 0.0, 1.0));
    add("agent", "lam", number<double>([](C& c) -> double& { return c.agent.lam; }, 0.0, 1.0));
    add("agent", "gamma", number<double>([](C& c) -> double& { return c.agent.gamma; }, 0.0, 1.0));
    add("agent", "epochs", number<int>([](C& c) -> int& { return c.agent.epochs; }, 1, 10000));
    add("agent", "minibatch", number<int>([](C& c) -> int& { return c.agent.minibatch; }, 1, kMaxInt));
    add("agent", "value_coef", number<double>([](C& c) -> double& { return c.agent.value_coef; }, 0.0, 1e6));
    add("agent", "max_grad_norm", number<double>([](C& c) -> double& { return c.agent.max_grad_norm; }, 0.0, 1e6));
    add("agent", "anneal_fraction", number<double>([](C& c) -> double& { return c.agent.anneal_fraction; }, 0.0, 1.0));
    add("agent", "anneal_down", boolean([](C& c) -> bool& { return c.agent.anneal_down; }));
    add("agent", "normalize_advantages", boolean([](C& c) -> bool& { return c.agent.normalize_advantages; }));
    add("agent", "lr", number<double>([](C& c) -> double& { return c.agent.adam.lr; }, 0.0, 1.0));
    add("agent", "adam_eps", number<double>([](C& c) -> double& { return c.agent.adam.eps; }, 0.0, 1.0));
    add("agent", "hidden", number_list<int>([](C& c) -> std::vector<int>& { return c.agent.hidden; }, 1, 4096));
    add("agent", "model_hidden", number_list<int>([](C& c) -> std::vector<int>& { return c.agent.model_hidden; }, 1, 4096));
    add("agent", "buffer_capacity", number<std::size_t>([](C& c) -> std::size_t& { return c.agent.buffer_capacity; }, 1, std::size_t{1} << 32));
    add("agent", "dynamics_steps", number<int>([](C& c) -> int& { return c.agent.dynamics_steps; }, 0, kMaxInt));
    add("agent", "dynamics_batch", number<int>([](C& c) -> int& { return c.agent.dynamics_batch; }, 1, kMaxInt));
    add("agent", "q_epochs", number<int>([](C& c) -> int& { return c.agent.q_epochs; }, 0, 10000));
    add("agent", "eval_interval", number<int>([](C& c) -> int& { return c.agent.eval_interval; }, 0, kMaxInt));
    add("agent", "eval_episodes", number<int>([](C& c) -> int& { return c.agent.eval_episodes; }, 1, 10000));

    // [agents]
    add("agents", "variants", method_list([](C& c) -> std::vector<spg::Method>& { return c.agents.variants; }, true));
    add("agents", "total_steps", number<long>([](C& c) -> long& { return c.agents.total_steps; }, 1L, kMaxLong));

    // [probe]
    add("probe", "n_estimates", number<int>([](C& c) -> int& { return c.probe.probe.n_estimates; }, 2, 1000000));
    add("probe", "probe_batch", number<int>([](C& c) -> int& { return c.probe.probe.probe_batch; }, 1, kMaxInt));
    add("probe", "n_checkpoints", number<int>([](C& c) -> int& { return c.probe.probe.n_checkpoints; }, 1, 100000));
    add("probe", "extra", number<int>([](C& c) -> int& { return c.probe.probe.extra; }, 0, 4096));
    add("probe", "methods", method_list([](C& c) -> std::vector<spg::Method>& { return c.probe.probe.methods; }, false));
    add("probe", "total_steps", number<long>([](C& c) -> long& { return c.probe.total_steps; }, 1L, kMaxLong));
    return k;
  }();
  return keys;
}

const KeySpec* find_key(const std::string& section, const std::string& name) {
  for (const auto& k : registry())
    if (k.section == section && k.name == name) return &k;
  return nullptr;
}

bool known_section(const std::string& s) {
  return s.empty() || s == "theory" || s == "fig1" || s == "agent" || s == "agents" || s == "probe";
}

std::size_t levenshtein(const std::string& a, const std::string& b) {
  std::vector<std::size_t> row(b.size() + 1);
  for (std::size_t j = 0; j <= b.size(); ++j) row[j] = j;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    std::size_t diag = row[0];
    row[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      const std::size_t up = row[j];
      row[j] = std::min({row[j] + 1, row[j - 1] + 1, diag + (a[i - 1] == b[j - 1] ? 0 : 1)});
      diag = up;
    }
  }
  return row[b.size()];
}

// Cross-field checks once every line has been applied.
void validate(const ExperimentConfig& c, std::vector<Diagnostic>& diags, int seeds_line) {
  auto fail = [&diags](int line, std::string msg) { diags.push_back({line, std::move(msg)}); };
  if (c.seeds.empty()) fail(seeds_line, "seeds: at least one seed is required");
  std::vector<long> sorted = c.seeds;
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) fail(seeds_line, "seeds: duplicate seed");

  const auto& t = c.theory;
  switch (c.kind) {
    case Kind::theory:
      if (t.min_states > t.max_states) fail(0, "theory: min_states exceeds max_states");
      if (t.min_actions > t.max_actions) fail(0, "theory: min_actions exceeds max_actions");
      if (t.mixing_low > t.mixing_high) fail(0, "theory: mixing_low exceeds mixing_high");
      if (t.horizons.empty() || t.actions.empty() || t.deltas.empty()) fail(0, "theory: empty grid list");
      break;
    case Kind::fig1:
      if (c.fig1.batches.empty() || c.fig1.actions.empty()) fail(0, "fig1: empty grid list");
      try {
        c.fig1.cell.validate();
      } catch (const ConfigError& e) {
        fail(0, e.what());
      }
      break;
    case Kind::agents:
    case Kind::probe:
      try {
        c.agent.validate();
        if (c.kind == Kind::probe) c.probe.probe.validate();
      } catch (const ConfigError& e) {
        fail(0, e.what());
      }
      break;
  }
}

}  // namespace

std::string suggest_key(const std::string& section, const std::string& key) {
  std::string best;
  std::size_t best_len = 0;
  // A valid key that the typo extends ("clip_coeff" -> "clip") or that extends the typo.
  for (const auto& k : registry()) {
    if (k.section != section) continue;
    const bool prefix = key.rfind(k.name, 0) == 0 || k.name.rfind(key, 0) == 0;
    if (prefix && !key.empty() && k.name.size() > best_len) {
      best = k.name;
      best_len = k.name.size();
    }
  }
  if (!best.empty()) return best;
  std::size_t best_dist = std::max<std::size_t>(2, key.size() / 3) + 1;
  for (const auto& k : registry()) {
    if (k.section != section) continue;
    const std::size_t d = levenshtein(key, k.name);
    if (d < best_dist) {
      best_dist = d;
      best = k.name;
    }
  }
  return best;
}

ParseResult parse_config(const std::string& text) {
  ParseResult result;
  ExperimentConfig config;
  std::string section;
  bool have_kind = false;
  int seeds_line = 0;
  std::map<std::string, int> seen;
  std::istringstream in(text);
  std::string raw;
  int line_no = 0;
  auto fail = [&result, &line_no](std::string msg) { result.diagnostics.push_back({line_no, std::move(msg)}); };

  while (std::getline(in, raw)) {
    ++line_no;
    const auto comment = raw.find_first_of("#;");
    const std::string line = trim(comment == std::string::npos ? raw : raw.substr(0, comment));
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') {
        fail("malformed section header '" + line + "'");
        continue;
      }
      section = trim(line.substr(1, line.size() - 2));
      if (!known_section(section)) fail("unknown section '" + section + "'");
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      fail("expected 'key = value', got '" + line + "'");
      continue;
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (!known_section(section)) continue;  // already reported at the header
    const std::string canonical = section.empty() ? key : section + "." + key;
    const KeySpec* spec = find_key(section, key);
    if (spec == nullptr) {
      const std::string hint = suggest_key(section, key);
      fail("unknown key '" + key + "'" + (section.empty() ? "" : " in [" + section + "]") +
           (hint.empty() ? "" : "; did you mean '" + hint + "'?"));
      continue;
    }
    if (auto [it, fresh] = seen.emplace(canonical, line_no); !fresh) {
      fail("duplicate key '" + canonical + "' (first set on line " + std::to_string(it->second) + ")");
      continue;
    }
    if (auto err = spec->apply(config, value)) {
      fail(canonical + ": " + *err);
      continue;
    }
    if (canonical == "kind") have_kind = true;
    if (canonical == "seeds") seeds_line = line_no;
    config.entries[canonical] = value;
  }

  line_no = 0;
  if (!have_kind) fail("missing required key 'kind'");
  if (result.diagnostics.empty()) validate(config, result.diagnostics, seeds_line);
  if (result.diagnostics.empty()) result.config = std::move(config);
  return result;
}

ParseResult load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    ParseResult r;
    r.diagnostics.push_back({0, "cannot read config file '" + path + "'"});
    return r;
  }
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::uint64_t config_hash(const ExperimentConfig& c) {
  std::uint64_t h = 1469598103934665603ULL;
  auto mix = [&h](const std::string& s) {
    for (unsigned char ch : s) {
      h ^= ch;
      h *= 1099511628211ULL;
    }
    h ^= 0xff;  // field separator
    h *= 1099511628211ULL;
  };
  for (const auto& [key, value] : c.entries) {
    mix(key);
    mix(value);
  }
  return h;
}

}  // namespace pgvlab::cli
