#ifndef SAFEBB_H
#define SAFEBB_H

/* Generated by cbindgen from src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Result code of every fallible call.
typedef enum SbbError {
  SBB_ERROR_OK = 0,
  SBB_ERROR_NULL_ARGUMENT = 1,
  SBB_ERROR_INVALID_UTF8 = 2,
  SBB_ERROR_PARSE = 3,
  SBB_ERROR_INVALID_OPTIONS = 4,
  SBB_ERROR_INDEX_OUT_OF_RANGE = 5,
  SBB_ERROR_BUFFER_TOO_SMALL = 6,
  SBB_ERROR_INVALID_REPORT = 7,
  SBB_ERROR_PANIC = 8,
} SbbError;

typedef enum SbbStatus {
  SBB_STATUS_OPTIMAL = 0,
  SBB_STATUS_INFEASIBLE = 1,
  SBB_STATUS_BUDGET_EXHAUSTED = 2,
} SbbStatus;

typedef enum SbbStrategy {
  SBB_STRATEGY_S1 = 1,
  SBB_STRATEGY_S2 = 2,
  SBB_STRATEGY_S3 = 3,
  SBB_STRATEGY_S4 = 4,
  SBB_STRATEGY_S5 = 5,
} SbbStrategy;

// Parsed problem.
typedef struct SbbProblem SbbProblem;

// Result of one solver run.
typedef struct SbbReport SbbReport;

// Solver options; start from [`sbb_options_default`].
typedef struct SbbOptions {
  // One of the `SbbStrategy` values.
  uint32_t strategy;
  // Absolute gap at which the search stops.
  double eps;
  size_t nb_starts;
  size_t max_nodes;
  double max_seconds;
  uint64_t seed;
} SbbOptions;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the last failed call on this thread, or null. The pointer stays
// valid until the next call into this library on the same thread.
const char *sbb_last_error(void);

// Parses a problem in the text format read by `safebb solve`.
//
// # Safety
// `source` must be a nul-terminated string; `out_problem` must be writable.
enum SbbError sbb_problem_parse(const char *source, struct SbbProblem **out_problem);

// Releases a problem. Null is accepted.
//
// # Safety
// `problem` must come from [`sbb_problem_parse`] and not be freed twice.
void sbb_problem_free(struct SbbProblem *problem);

// Number of variables of a problem.
//
// # Safety
// `problem` must be a live handle; `out_n` must be writable.
enum SbbError sbb_problem_num_vars(const struct SbbProblem *problem, size_t *out_n);

struct SbbOptions sbb_options_default(void);

// Runs the branch and bound. A null `options` means the defaults.
//
// # Safety
// `problem` must be a live handle, `options` null or readable, `out_report`
// writable.
enum SbbError sbb_solve(const struct SbbProblem *problem,
                        const struct SbbOptions *options,
                        struct SbbReport **out_report);

// Releases a report. Null is accepted.
//
// # Safety
// `report` must come from [`sbb_solve`] and not be freed twice.
void sbb_report_free(struct SbbReport *report);

// # Safety
// `report` must be a live handle; `out_status` must be writable.
enum SbbError sbb_report_status(const struct SbbReport *report, enum SbbStatus *out_status);

// Final bounds `L` and `U`. Infeasible problems give `L = +inf`, `U = -inf`.
// `out_unsafe` is set when `U` is not backed by a proof (strategy S1).
//
// # Safety
// `report` must be a live handle; the out-pointers must be writable.
enum SbbError sbb_report_bounds(const struct SbbReport *report,
                                double *out_lower,
                                double *out_upper,
                                bool *out_unsafe);

// Nodes processed, existence tests run and existence tests that succeeded.
//
// # Safety
// `report` must be a live handle; the out-pointers must be writable.
enum SbbError sbb_report_counts(const struct SbbReport *report,
                                size_t *out_nodes,
                                size_t *out_attempts,
                                size_t *out_successes);

// Copies proven box `index` into `lo[0..len]` and `hi[0..len]`. `len` must
// be at least the number of variables.
//
// # Safety
// `report` must be a live handle; `lo` and `hi` must hold `len` doubles.
enum SbbError sbb_report_proven_box(const struct SbbReport *report,
                                    size_t index,
                                    double *lo,
                                    double *hi,
                                    size_t len);

// Serializes the run report (the layout written by `safebb solve --out`).
// The string must be released with [`sbb_string_free`].
//
// # Safety
// `report` must be a live handle, `name` null or a nul-terminated string,
// `out_json` writable.
enum SbbError sbb_report_to_json(const struct SbbReport *report, const char *name, char **out_json);

// Reruns the existence test of every certificate in a JSON run report and
// stores how many fail.
//
// # Safety
// `problem` must be a live handle, `json` a nul-terminated string,
// `out_failed` writable.
enum SbbError sbb_replay_json(const struct SbbProblem *problem,
                              const char *json,
                              size_t *out_failed);

// Releases a string returned by this library. Null is accepted.
//
// # Safety
// `s` must come from this library and not be freed twice.
void sbb_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SAFEBB_H */
