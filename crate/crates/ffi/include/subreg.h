#ifndef SUBREG_H
#define SUBREG_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result of a fallible call.
 */
typedef enum SubregStatus {
  SUBREG_STATUS_OK = 0,
  SUBREG_STATUS_NULL_ARGUMENT = 1,
  SUBREG_STATUS_INVALID_UTF8 = 2,
  SUBREG_STATUS_PARSE = 3,
  SUBREG_STATUS_EVALUATION = 4,
  SUBREG_STATUS_UNKNOWN_EXAMPLE = 5,
  SUBREG_STATUS_PANIC = 6,
} SubregStatus;

/**
 * Verdict of a certificate.
 */
typedef enum SubregVerdict {
  SUBREG_VERDICT_CERTIFIED = 0,
  SUBREG_VERDICT_REFUTED = 1,
  SUBREG_VERDICT_INCONCLUSIVE = 2,
} SubregVerdict;

/**
 * A parsed problem document.
 */
typedef struct SubregProblem SubregProblem;

/**
 * The report of a run.
 */
typedef struct SubregReport SubregReport;

/**
 * Run settings. `has_seed == false` keeps the document seed.
 */
typedef struct SubregRunOptions {
  bool has_seed;
  uint64_t seed;
  bool skip_eval_errors;
} SubregRunOptions;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or null. Valid until the
 * next failing call on the same thread.
 */
const char *subreg_last_error(void);

/**
 * Parses a problem document.
 *
 * # Safety
 * `text` is a NUL-terminated string and `out` a valid pointer.
 */
enum SubregStatus subreg_problem_parse(const char *text, struct SubregProblem **out);

/**
 * Number of tasks in a parsed problem; 0 for null.
 *
 * # Safety
 * `p` is null or a live handle.
 */
size_t subreg_problem_task_count(const struct SubregProblem *p);

/**
 * Runs every task of a problem. `opts` may be null for defaults.
 *
 * # Safety
 * `p` is a live handle, `opts` null or valid, `out` a valid pointer.
 */
enum SubregStatus subreg_problem_run(const struct SubregProblem *p,
                                     const struct SubregRunOptions *opts,
                                     struct SubregReport **out);

/**
 * # Safety
 * `p` is null or a handle from [`subreg_problem_parse`], not yet freed.
 */
void subreg_problem_free(struct SubregProblem *p);

/**
 * Runs a catalog example by id.
 *
 * # Safety
 * `id` is a NUL-terminated string, `opts` null or valid, `out` a valid
 * pointer.
 */
enum SubregStatus subreg_reproduce(const char *id,
                                   const struct SubregRunOptions *opts,
                                   struct SubregReport **out);

/**
 * The process exit code the command line would return for this report;
 * -1 for null.
 *
 * # Safety
 * `r` is null or a live handle.
 */
int32_t subreg_report_exit_code(const struct SubregReport *r);

/**
 * The report as JSON, without timings when `canonical`. Null on a null
 * handle. Free with [`subreg_string_free`].
 *
 * # Safety
 * `r` is null or a live handle.
 */
char *subreg_report_json(const struct SubregReport *r, bool canonical);

/**
 * # Safety
 * `r` is null or a handle returned by this library, not yet freed.
 */
void subreg_report_free(struct SubregReport *r);

/**
 * # Safety
 * `s` is null or a string returned by this library, not yet freed.
 */
void subreg_string_free(char *s);

/**
 * Certifies strong metric subregularity of a single-valued expression at
 * `(xbar, ybar)` with the default schedule and threshold, writing the
 * modulus estimate and verdict.
 *
 * # Safety
 * `expr` is a NUL-terminated string; `xbar` and `ybar` point to `n` and
 * `m` doubles; `modulus` and `verdict` are valid pointers.
 */
enum SubregStatus subreg_certify_sms_expr(const char *expr,
                                          const double *xbar,
                                          size_t n,
                                          const double *ybar,
                                          size_t m,
                                          double *modulus,
                                          enum SubregVerdict *verdict);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SUBREG_H */
