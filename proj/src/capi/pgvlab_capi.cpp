#include "pgvlab/pgvlab.h"

#include "cli/config.hpp"
#include "cli/runner.hpp"
#include "common/interrupt.hpp"
#include "common/version.hpp"

#include <csignal>
#include <string>
#include <vector>

struct pgvlab_config {
  pgvlab::cli::ParseResult parsed;
  std::vector<std::string> diagnostics;
  std::string kind;
};

namespace {

thread_local std::string t_last_error;

pgvlab_status fail(pgvlab_status status, std::string message) {
  t_last_error = std::move(message);
  return status;
}

pgvlab_status wrap(pgvlab::cli::ParseResult parsed, pgvlab_config** out) {
  auto* c = new pgvlab_config{std::move(parsed), {}, {}};
  for (const auto& d : c->parsed.diagnostics) c->diagnostics.push_back(pgvlab::cli::format(d));
  if (c->parsed.config) c->kind = pgvlab::cli::kind_name(c->parsed.config->kind);
  *out = c;
  if (!c->parsed.ok()) return fail(PGVLAB_ERR_CONFIG, c->diagnostics.front());
  return PGVLAB_OK;
}

extern "C" void on_signal(int) { pgvlab::request_interrupt(); }

}  // namespace

extern "C" {

const char* pgvlab_version(void) { return pgvlab::kVersion; }

const char* pgvlab_status_string(pgvlab_status status) {
  switch (status) {
    case PGVLAB_OK: return "ok";
    case PGVLAB_ERR_RUNTIME: return "runtime error";
    case PGVLAB_ERR_CONFIG: return "invalid configuration";
    case PGVLAB_ERR_INVALID_ARGUMENT: return "invalid argument";
    case PGVLAB_ERR_IO: return "i/o error";
    case PGVLAB_INTERRUPTED: return "interrupted";
  }
  return "unknown status";
}

const char* pgvlab_last_error(void) { return t_last_error.c_str(); }

int pgvlab_exit_code(pgvlab_status status) {
  switch (status) {
    case PGVLAB_OK: return 0;
    case PGVLAB_ERR_CONFIG: return 2;
    case PGVLAB_INTERRUPTED: return 130;
    default: return 1;
  }
}

pgvlab_status pgvlab_config_parse(const char* text, pgvlab_config** out) {
  if (out == nullptr) return fail(PGVLAB_ERR_INVALID_ARGUMENT, "pgvlab_config_parse: out is NULL");
  *out = nullptr;
  if (text == nullptr) return fail(PGVLAB_ERR_INVALID_ARGUMENT, "pgvlab_config_parse: text is NULL");
  try {
    return wrap(pgvlab::cli::parse_config(text), out);
  } catch (const std::exception& e) {
    return fail(PGVLAB_ERR_RUNTIME, e.what());
  }
}

pgvlab_status pgvlab_config_load(const char* path, pgvlab_config** out) {
  if (out == nullptr) return fail(PGVLAB_ERR_INVALID_ARGUMENT, "pgvlab_config_load: out is NULL");
  *out = nullptr;
  if (path == nullptr) return fail(PGVLAB_ERR_INVALID_ARGUMENT, "pgvlab_config_load: path is NULL");
  try {
    return wrap(pgvlab::cli::load_config(path), out);
  } catch (const std::exception& e) {
    return fail(PGVLAB_ERR_RUNTIME, e.what());
  }
}

void pgvlab_config_free(pgvlab_config* config) { delete config; }

int pgvlab_config_valid(const pgvlab_config* config) { return config != nullptr && config->parsed.ok() ? 1 : 0; }

size_t pgvlab_config_diagnostic_count(const pgvlab_config* config) {
  return config == nullptr ? 0 : config->diagnostics.size();
}

const char* pgvlab_config_diagnostic(const pgvlab_config* config, size_t index) {
  if (config == nullptr || index >= config->diagnostics.size()) return nullptr;
  return config->diagnostics[index].c_str();
}

pgvlab_status pgvlab_config_hash(const pgvlab_config* config, uint64_t* out) {
  if (config == nullptr || out == nullptr) return fail(PGVLAB_ERR_INVALID_ARGUMENT, "pgvlab_config_hash: NULL argument");
  if (!config->parsed.config) return fail(PGVLAB_ERR_CONFIG, "pgvlab_config_hash: configuration is invalid");
  *out = pgvlab::cli::config_hash(*config->parsed.config);
  return PGVLAB_OK;
}

const char* pgvlab_config_kind(const pgvlab_config* config) {
  return config == nullptr || config->kind.empty() ? nullptr : config->kind.c_str();
}

pgvlab_status pgvlab_run(const pgvlab_config* config, const pgvlab_run_options* options) {
  if (config == nullptr) return fail(PGVLAB_ERR_INVALID_ARGUMENT, "pgvlab_run: config is NULL");
  if (!config->parsed.config)
    return fail(PGVLAB_ERR_CONFIG, config->diagnostics.empty() ? "invalid configuration" : config->diagnostics.front());
  pgvlab::cli::RunOptions opts;
  if (options != nullptr) {
    if (options->workers < 0) return fail(PGVLAB_ERR_INVALID_ARGUMENT, "pgvlab_run: workers must be >= 0");
    if (options->out_dir != nullptr) opts.out_dir = options->out_dir;
    opts.workers = options->workers;
    opts.seed_offset = options->seed_offset;
  }
  try {
    const auto outcome = pgvlab::cli::run_experiment(*config->parsed.config, opts);
    switch (outcome.exit_code) {
      case pgvlab::cli::kExitOk: return PGVLAB_OK;
      case pgvlab::cli::kExitConfig: return fail(PGVLAB_ERR_CONFIG, outcome.message);
      case pgvlab::cli::kExitInterrupted: return fail(PGVLAB_INTERRUPTED, outcome.message);
      default: return fail(PGVLAB_ERR_RUNTIME, outcome.message);
    }
  } catch (const std::exception& e) {
    return fail(PGVLAB_ERR_RUNTIME, e.what());
  }
}

void pgvlab_request_interrupt(void) { pgvlab::request_interrupt(); }

void pgvlab_clear_interrupt(void) { pgvlab::clear_interrupt(); }

pgvlab_status pgvlab_install_signal_handlers(void) {
  if (std::signal(SIGINT, on_signal) == SIG_ERR || std::signal(SIGTERM, on_signal) == SIG_ERR)
    return fail(PGVLAB_ERR_RUNTIME, "cannot install signal handlers");
  return PGVLAB_OK;
}

}  // extern "C"
