/* C ABI of the blochmap qubit open-system dynamics engine. */

#ifndef BLOCHMAP_H
#define BLOCHMAP_H

/* Generated by cbindgen; do not edit by hand. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Status code of every fallible call.
typedef enum BmStatus {
  // Success.
  BM_OK = 0,
  // Invalid configuration (unknown key, bad value, bad scenario).
  BM_ERR_CONFIG = 2,
  // Numerical failure during integration or map inversion.
  BM_ERR_NUMERICAL = 3,
  // NULL pointer, non-UTF-8 string, or other argument misuse.
  BM_ERR_ARGUMENT = 4,
  // Filesystem error while writing results.
  BM_ERR_IO = 5,
} BmStatus;

// Opaque scenario configuration handle.
typedef struct BmConfig BmConfig;

// Diagnostics verdicts and witness numbers; booleans are 0/1.
typedef struct BmDiagnoseResult {
  uint8_t cp_divisible;
  uint8_t blp_monotone;
  uint8_t phase_covariant;
  uint8_t p_monotone;
  uint8_t c_monotone;
  double min_propagator_choi_eig;
  double blp_max_increase;
  double max_pc_residual;
  size_t p_extrema;
  size_t c_extrema;
} BmDiagnoseResult;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Library version as a static NUL-terminated string.
const char *bm_version(void);

// Thread-local message of the most recent failure on this thread. Never
// NULL; valid until the next failing call on the same thread.
const char *bm_last_error_message(void);

// Allocates a configuration with the named scenario's defaults. Scenario
// names match the CLI: "fig2", "fig3", "fig4", "diagnose", "scan-cp".
// Returns NULL (with the error recorded) on an unknown name.
//
// # Safety
// `scenario` must be NULL or a NUL-terminated string.
struct BmConfig *bm_config_new(const char *scenario);

// Sets one configuration key, with the same keys and validation as the
// CLI and config files.
//
// # Safety
// `cfg` must be a live handle from `bm_config_new`; `key` and `value` must
// be NUL-terminated strings.
enum BmStatus bm_config_set(struct BmConfig *cfg, const char *key, const char *value);

// Releases a configuration handle. NULL is a no-op.
//
// # Safety
// `cfg` must be NULL or a live handle; the handle is dead afterwards.
void bm_config_free(struct BmConfig *cfg);

// Runs the configured scenario and writes its CSV to `out_path` (for
// "fig4" a companion `<stem>_region.<ext>` file is written next to it).
// The "diagnose" scenario writes its per-time table; use `bm_diagnose`
// for the verdicts.
//
// # Safety
// `cfg` must be a live handle; `out_path` a NUL-terminated string.
enum BmStatus bm_run_to_csv(const struct BmConfig *cfg, const char *out_path);

// Runs the diagnostics pipeline on the configured model and fills `out`.
//
// # Safety
// `cfg` must be a live handle; `out` a valid, writable struct pointer.
enum BmStatus bm_diagnose(const struct BmConfig *cfg, struct BmDiagnoseResult *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* BLOCHMAP_H */
