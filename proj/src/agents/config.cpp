#include "agents/config.hpp"

#include "common/error.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace pgvlab::agents {

namespace {

void check(bool ok, const std::string& what) {
  if (!ok) throw ConfigError("agent config: " + what);
}

}  // namespace

void AgentConfig::validate() const {
  check(batch >= 1, "batch must be >= 1");
  check(extra >= 0, "extra must be >= 0");
  check(horizon >= 0, "horizon must be >= 0");
  check(clip > 0.0 && clip < 1.0, "clip must lie in (0, 1)");
  check(lam >= 0.0 && lam <= 1.0, "lam must lie in [0, 1]");
  check(gamma >= 0.0 && gamma <= 1.0, "gamma must lie in [0, 1]");
  check(epochs >= 1, "epochs must be >= 1");
  check(minibatch >= 1, "minibatch must be >= 1");
  check(value_coef >= 0.0, "value_coef must be >= 0");
  check(max_grad_norm > 0.0, "max_grad_norm must be > 0");
  check(anneal_fraction >= 0.0 && anneal_fraction <= 1.0, "anneal_fraction must lie in [0, 1]");
  check(adam.lr > 0.0 && adam.eps > 0.0, "lr and eps must be > 0");
  check(std::all_of(hidden.begin(), hidden.end(), [](int h) { return h >= 1; }), "hidden sizes must be >= 1");
  check(std::all_of(model_hidden.begin(), model_hidden.end(), [](int h) { return h >= 1; }),
        "model hidden sizes must be >= 1");
  check(buffer_capacity >= 1, "buffer_capacity must be >= 1");
  check(dynamics_steps >= 0 && dynamics_batch >= 1, "dynamics_steps >= 0 and dynamics_batch >= 1 required");
  check(q_epochs >= 0, "q_epochs must be >= 0");
  check(eval_interval >= 0 && eval_episodes >= 0, "eval settings must be >= 0");
}

int annealed_extra(const AgentConfig& config, long step, long total_steps) {
  const double window = config.anneal_fraction * static_cast<double>(total_steps);
  const double frac = window <= 0.0 ? 1.0 : std::min(1.0, static_cast<double>(step) / window);
  const int ramp = static_cast<int>(std::floor(frac * config.extra + 1e-12));
  return config.anneal_down ? config.extra - ramp : ramp;
}

}  // namespace pgvlab::agents
