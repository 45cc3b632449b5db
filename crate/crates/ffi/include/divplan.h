#ifndef DIVPLAN_H
#define DIVPLAN_H

#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>

/**
 * Result codes.
 */
typedef enum DivplanStatus {
  /**
   * `k` plans found, or the task loaded.
   */
  DIVPLAN_STATUS_OK = 0,
  /**
   * Fewer than `k` plans exist within the cost bound.
   */
  DIVPLAN_STATUS_EXHAUSTED = 1,
  /**
   * The solver ran out of time or memory.
   */
  DIVPLAN_STATUS_BUDGET = 2,
  /**
   * Unreadable, malformed or unsupported input.
   */
  DIVPLAN_STATUS_INPUT_ERROR = 3,
  /**
   * Solver failure or other internal error.
   */
  DIVPLAN_STATUS_INTERNAL_ERROR = 4,
  /**
   * A required pointer argument was null.
   */
  DIVPLAN_STATUS_NULL_ARGUMENT = 5,
  /**
   * A string argument was not valid UTF-8.
   */
  DIVPLAN_STATUS_INVALID_UTF8 = 6,
  /**
   * A Rust panic was caught at the boundary.
   */
  DIVPLAN_STATUS_PANIC = 7,
} DivplanStatus;

/**
 * Result of one solve.
 */
typedef struct DivplanReport DivplanReport;

/**
 * A loaded planning task.
 */
typedef struct DivplanTask DivplanTask;

/**
 * Solve options. Zero fields take the defaults noted below.
 */
typedef struct DivplanSolveOptions {
  /**
   * Number of plans; 0 = the feature file's `k`, else until exhausted.
   */
  size_t k;
  /**
   * Wall-clock budget in milliseconds; 0 = none.
   */
  uint64_t timeout_ms;
  /**
   * Solver memory limit in MB; 0 = none.
   */
  uint64_t memory_mb;
  /**
   * Quality multiplier `q = num / den`; `den = 0` = from the feature file.
   */
  int64_t quality_num;
  int64_t quality_den;
  /**
   * Explicit cost bound; 0 = derive from `q`.
   */
  uint32_t cost_bound;
  /**
   * Run the plan-forbidding baseline instead.
   */
  bool naive;
} DivplanSolveOptions;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Parse and ground a task. `features` may be null.
 *
 * # Safety
 * String arguments must be null or NUL-terminated; `out` must be a valid
 * pointer to writable storage.
 */
enum DivplanStatus divplan_task_load(const char *domain,
                                     const char *problem,
                                     const char *features,
                                     struct DivplanTask **out);

/**
 * Release a task; null is ignored.
 *
 * # Safety
 * `task` must be null or a pointer from `divplan_task_load` not yet freed.
 */
void divplan_task_free(struct DivplanTask *task);

/**
 * Generate a diverse plan set. `opts` may be null for defaults. A report
 * is stored in `out` whenever the status is `Ok`, `Exhausted` or `Budget`.
 *
 * # Safety
 * `task` must come from `divplan_task_load`; `out` must be writable.
 */
enum DivplanStatus divplan_solve(const struct DivplanTask *task,
                                 const struct DivplanSolveOptions *opts,
                                 struct DivplanReport **out);

/**
 * The report as a JSON document; free with `divplan_string_free`.
 * Returns null if `report` is null.
 *
 * # Safety
 * `report` must be null or a live pointer from `divplan_solve`.
 */
char *divplan_report_json(const struct DivplanReport *report);

/**
 * Number of distinct behaviours among the reported plans.
 *
 * # Safety
 * `report` must be null or a live pointer from `divplan_solve`.
 */
size_t divplan_report_behaviour_count(const struct DivplanReport *report);

/**
 * Number of reported plans.
 *
 * # Safety
 * `report` must be null or a live pointer from `divplan_solve`.
 */
size_t divplan_report_plan_count(const struct DivplanReport *report);

/**
 * Release a report; null is ignored.
 *
 * # Safety
 * `report` must be null or a pointer from `divplan_solve` not yet freed.
 */
void divplan_report_free(struct DivplanReport *report);

/**
 * Release a string returned by this library; null is ignored.
 *
 * # Safety
 * `s` must be null or a string from `divplan_report_json` not yet freed.
 */
void divplan_string_free(char *s);

/**
 * Message of the last failed call on this thread, or null. Valid until
 * the next call into the library on the same thread.
 */
const char *divplan_last_error_message(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* DIVPLAN_H */
