#include "pgvlab/pgvlab.h"

#include <CLI11.hpp>

#include <cstdio>
#include <string>

namespace {

void print_diagnostics(const pgvlab_config* config, const std::string& path) {
  const size_t n = pgvlab_config_diagnostic_count(config);
  for (size_t i = 0; i < n; ++i) std::fprintf(stderr, "%s: %s\n", path.c_str(), pgvlab_config_diagnostic(config, i));
}

// Loads and reports; returns null after printing when the file is unusable.
pgvlab_config* load(const std::string& path) {
  pgvlab_config* config = nullptr;
  const pgvlab_status status = pgvlab_config_load(path.c_str(), &config);
  if (status == PGVLAB_OK) return config;
  if (config != nullptr)
    print_diagnostics(config, path);
  else
    std::fprintf(stderr, "pgvlab: %s\n", pgvlab_last_error());
  pgvlab_config_free(config);
  return nullptr;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"pgvlab: policy-gradient variance experiments"};
  app.set_version_flag("--version", std::string(pgvlab_version()));
  app.require_subcommand(1);

  std::string run_path, out_dir;
  int workers = 0;
  long seed_offset = 0;
  CLI::App* run = app.add_subcommand("run", "run the experiment described by a config file");
  run->add_option("config", run_path, "config file")->required();
  run->add_option("--out", out_dir, "output directory (overrides the config)");
  run->add_option("--workers", workers, "worker threads, 0 for one per core")->check(CLI::NonNegativeNumber);
  run->add_option("--seed-offset", seed_offset, "added to every configured seed");

  std::string validate_path;
  CLI::App* validate = app.add_subcommand("validate", "check a config file without running it");
  validate->add_option("config", validate_path, "config file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  if (*validate) {
    pgvlab_config* config = load(validate_path);
    if (config == nullptr) return pgvlab_exit_code(PGVLAB_ERR_CONFIG);
    uint64_t hash = 0;
    pgvlab_config_hash(config, &hash);
    std::printf("%s: ok (kind %s, hash %016llx)\n", validate_path.c_str(), pgvlab_config_kind(config),
                static_cast<unsigned long long>(hash));
    pgvlab_config_free(config);
    return 0;
  }

  pgvlab_config* config = load(run_path);
  if (config == nullptr) return pgvlab_exit_code(PGVLAB_ERR_CONFIG);
  pgvlab_install_signal_handlers();
  const pgvlab_run_options options{out_dir.c_str(), workers, seed_offset};
  const pgvlab_status status = pgvlab_run(config, &options);
  pgvlab_config_free(config);
  if (status != PGVLAB_OK) std::fprintf(stderr, "pgvlab: %s: %s\n", pgvlab_status_string(status), pgvlab_last_error());
  return pgvlab_exit_code(status);
}
