#ifndef SBVP_H
#define SBVP_H

/* Generated by cbindgen; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result codes.
 */
typedef enum {
  SBVP_STATUS_OK = 0,
  SBVP_STATUS_NULL_POINTER = 1,
  SBVP_STATUS_INVALID_UTF8 = 2,
  SBVP_STATUS_INVALID_CONFIG = 3,
  SBVP_STATUS_NON_CONVERGENCE = 4,
  SBVP_STATUS_NOT_FOUND = 5,
  SBVP_STATUS_BUFFER_TOO_SMALL = 6,
  SBVP_STATUS_FAILURE = 7,
  SBVP_STATUS_PANIC = 8,
} SbvpStatus;

/**
 * A diagnostics report.
 */
typedef struct SbvpReport SbvpReport;

/**
 * A solved scenario.
 */
typedef struct SbvpSolution SbvpSolution;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failure on this thread, or null. Valid until the next
 * failing call on the same thread.
 */
const char *sbvp_last_error(void);

/**
 * Library version as a static string.
 */
const char *sbvp_version(void);

/**
 * Releases a string returned by the library.
 *
 * # Safety
 * `s` must come from this library and not have been freed.
 */
void sbvp_string_free(char *s);

/**
 * Solves the scenario described by a JSON config.
 *
 * # Safety
 * `config_json` must be a NUL-terminated string and `out` a valid pointer.
 */
SbvpStatus sbvp_solve(const char *config_json, SbvpSolution **out);

/**
 * # Safety
 * `sol` must come from [`sbvp_solve`] and not have been freed.
 */
void sbvp_solution_free(SbvpSolution *sol);

/**
 * Number of sites, or 0 for a null handle.
 *
 * # Safety
 * `sol` must be null or a live handle.
 */
uintptr_t sbvp_solution_len(const SbvpSolution *sol);

/**
 * Copies the sites as interleaved `x, y` pairs into `buf` (length `2n`).
 *
 * # Safety
 * `buf` must be valid for `len` doubles.
 */
SbvpStatus sbvp_solution_sites(const SbvpSolution *sol, double *buf, uintptr_t len);

/**
 * Copies the dual weights into `buf` (length `n`).
 *
 * # Safety
 * `buf` must be valid for `len` doubles.
 */
SbvpStatus sbvp_solution_weights(const SbvpSolution *sol, double *buf, uintptr_t len);

/**
 * Evaluates the potential `u` and the transport map at `(x, y)`.
 *
 * # Safety
 * `value` and `map` (two doubles) must be valid, or null to skip.
 */
SbvpStatus sbvp_solution_eval(const SbvpSolution *sol,
                              double x,
                              double y,
                              double *value,
                              double *map);

/**
 * Runs every diagnostic stage on a solution. Stage failures are recorded in
 * the report, not returned.
 *
 * # Safety
 * `sol` must be a live handle and `out` a valid pointer.
 */
SbvpStatus sbvp_analyze(const SbvpSolution *sol, SbvpReport **out);

/**
 * # Safety
 * `rep` must come from [`sbvp_analyze`] and not have been freed.
 */
void sbvp_report_free(SbvpReport *rep);

/**
 * The report as JSON; release with [`sbvp_string_free`]. Null on failure.
 *
 * # Safety
 * `rep` must be a live handle.
 */
char *sbvp_report_json(const SbvpReport *rep);

/**
 * Looks up a summary metric such as `"map_rms"` or `"area_slope@0"`.
 *
 * # Safety
 * `key` must be NUL-terminated and `out` valid.
 */
SbvpStatus sbvp_report_summary(const SbvpReport *rep, const char *key, double *out);

/**
 * Number of stages that failed while building the report.
 *
 * # Safety
 * `rep` must be null or a live handle.
 */
uintptr_t sbvp_report_failure_count(const SbvpReport *rep);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SBVP_H */
