/* pgvlab C interface. Handles are opaque; every call reports a status and
 * leaves a message for pgvlab_last_error() on failure. Nothing throws across
 * this boundary. */
#ifndef PGVLAB_PGVLAB_H
#define PGVLAB_PGVLAB_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define PGVLAB_API __declspec(dllexport)
#else
#define PGVLAB_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum pgvlab_status {
  PGVLAB_OK = 0,
  PGVLAB_ERR_RUNTIME = 1,
  PGVLAB_ERR_CONFIG = 2,
  PGVLAB_ERR_INVALID_ARGUMENT = 3,
  PGVLAB_ERR_IO = 4,
  PGVLAB_INTERRUPTED = 130
} pgvlab_status;

typedef struct pgvlab_config pgvlab_config;

typedef struct pgvlab_run_options {
  const char* out_dir; /* NULL or "" keeps the configured directory */
  int workers;         /* 0: one per hardware thread, capped by PGVLAB_THREADS */
  long seed_offset;
} pgvlab_run_options;

PGVLAB_API const char* pgvlab_version(void);
PGVLAB_API const char* pgvlab_status_string(pgvlab_status status);
/* Message of the last failed call on this thread, "" when none. */
PGVLAB_API const char* pgvlab_last_error(void);
/* Process exit code for a status: 0, 1, 2 or 130. */
PGVLAB_API int pgvlab_exit_code(pgvlab_status status);

/* Both set *out even when the text is invalid, so diagnostics can be read;
 * the status is then PGVLAB_ERR_CONFIG. Free with pgvlab_config_free. */
PGVLAB_API pgvlab_status pgvlab_config_parse(const char* text, pgvlab_config** out);
PGVLAB_API pgvlab_status pgvlab_config_load(const char* path, pgvlab_config** out);
PGVLAB_API void pgvlab_config_free(pgvlab_config* config);

PGVLAB_API int pgvlab_config_valid(const pgvlab_config* config);
PGVLAB_API size_t pgvlab_config_diagnostic_count(const pgvlab_config* config);
/* "line N: message" text, valid until the handle is freed. NULL past the end. */
PGVLAB_API const char* pgvlab_config_diagnostic(const pgvlab_config* config, size_t index);
PGVLAB_API pgvlab_status pgvlab_config_hash(const pgvlab_config* config, uint64_t* out);
/* "theory", "fig1", "agents" or "probe"; NULL for an invalid handle. */
PGVLAB_API const char* pgvlab_config_kind(const pgvlab_config* config);

/* Runs the experiment, writing CSVs into the output directory. options may be NULL. */
PGVLAB_API pgvlab_status pgvlab_run(const pgvlab_config* config, const pgvlab_run_options* options);

/* Ask running experiments to stop after flushing finished rows. Signal safe. */
PGVLAB_API void pgvlab_request_interrupt(void);
PGVLAB_API void pgvlab_clear_interrupt(void);
/* SIGINT and SIGTERM call pgvlab_request_interrupt. */
PGVLAB_API pgvlab_status pgvlab_install_signal_handlers(void);

#ifdef __cplusplus
}
#endif

#endif
