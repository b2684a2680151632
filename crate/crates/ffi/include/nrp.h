#ifndef NRP_H
#define NRP_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum NrpStatus {
  NRP_STATUS_OK = 0,
  /**
   * A null pointer, bad UTF-8 or malformed options.
   */
  NRP_STATUS_INVALID_ARGUMENT = 1,
  /**
   * The problem text is not a well-formed document.
   */
  NRP_STATUS_PARSE = 2,
  /**
   * The catalog failed validation.
   */
  NRP_STATUS_INVALID_CATALOG = 3,
  /**
   * Objectives, bounds, indicators or solver settings are unusable.
   */
  NRP_STATUS_CONFIG = 4,
  /**
   * Mandatory requirements, combinations or implications admit no release.
   */
  NRP_STATUS_INFEASIBLE = 5,
  NRP_STATUS_IO = 6,
  /**
   * A Rust panic was caught at the boundary.
   */
  NRP_STATUS_INTERNAL = 7,
} NrpStatus;

/**
 * A solved Pareto front with the context needed to analyze it.
 */
typedef struct NrpFront NrpFront;

/**
 * A loaded problem document.
 */
typedef struct NrpProblem NrpProblem;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Parses a problem document from NUL-terminated JSON.
 *
 * # Safety
 * `json` must be a valid C string and `out` a writable pointer.
 */
enum NrpStatus nrp_problem_parse(const char *json, struct NrpProblem **out);

/**
 * Loads a problem document from a file.
 *
 * # Safety
 * `path` must be a valid C string and `out` a writable pointer.
 */
enum NrpStatus nrp_problem_load(const char *path, struct NrpProblem **out);

/**
 * Number of requirements in the catalog, before preprocessing.
 *
 * # Safety
 * `problem` must come from `nrp_problem_parse` or `nrp_problem_load`.
 */
enum NrpStatus nrp_problem_len(const struct NrpProblem *problem, size_t *out);

/**
 * # Safety
 * `problem` must be null or a handle not yet freed.
 */
void nrp_problem_free(struct NrpProblem *problem);

/**
 * Preprocesses and solves `problem`. `options_json` may be null.
 *
 * # Safety
 * `problem` must be a live handle, `options_json` null or a valid C string,
 * and `out` a writable pointer.
 */
enum NrpStatus nrp_solve(const struct NrpProblem *problem,
                         const char *options_json,
                         struct NrpFront **out);

/**
 * Number of solutions on the front.
 *
 * # Safety
 * `front` must be a live handle and `out` writable.
 */
enum NrpStatus nrp_front_len(const struct NrpFront *front, size_t *out);

/**
 * The front as the JSON document `nrp solve` writes.
 *
 * # Safety
 * `front` must be a live handle and `out` writable.
 */
enum NrpStatus nrp_front_to_json(const struct NrpFront *front, char **out);

/**
 * Handpicks the `k` solutions nearest the bound and scores them, returning
 * the report as JSON. `indicators` is a comma-separated list, or null for the
 * defaults; `attribute` is null for the first upper-bounded attribute.
 *
 * # Safety
 * `front` must be a live handle, the strings null or valid C strings, and
 * `out` writable.
 */
enum NrpStatus nrp_front_analyze(const struct NrpFront *front,
                                 size_t k,
                                 const char *indicators,
                                 const char *attribute,
                                 char **out);

/**
 * # Safety
 * `front` must be null or a handle not yet freed.
 */
void nrp_front_free(struct NrpFront *front);

/**
 * # Safety
 * `s` must be null or a string returned by this library, not yet freed.
 */
void nrp_string_free(char *s);

/**
 * Message for the last failed call on this thread, or null. Valid until the
 * next call into the library on the same thread.
 */
const char *nrp_last_error(void);

/**
 * Library version, statically allocated.
 */
const char *nrp_version(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* NRP_H */
