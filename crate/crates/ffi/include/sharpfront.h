#ifndef SHARPFRONT_H
#define SHARPFRONT_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result codes of every fallible entry point.
 */
typedef enum SfStatus {
  SF_OK = 0,
  SF_NULL_POINTER = 1,
  SF_INVALID_ARGUMENT = 2,
  SF_INVALID_UTF8 = 3,
  SF_CONFIG = 4,
  SF_IO = 5,
  SF_SNAPSHOT = 6,
  SF_GAUGE = 7,
  SF_BLOW_UP = 8,
  SF_FRONT_COLLAPSE = 9,
  SF_FRONT_BREAKDOWN = 10,
  SF_BUFFER_SIZE = 11,
  SF_PANIC = 12,
} SfStatus;

/**
 * A configured model: kind, grid and hyperdissipation.
 */
typedef struct SfModel SfModel;

/**
 * Prognostic fields at one time.
 */
typedef struct SfState SfState;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static NUL-terminated string.
 */
const char *sf_version(void);

/**
 * Message of the last failing call on this thread, or NULL when none.
 * The pointer stays valid until the next failing call on the same thread.
 */
const char *sf_last_error(void);

/**
 * Creates a model.
 *
 * `kind` is one of `passive`, `euler`, `qg`, `boussinesq`, `mhd`.
 * `stream_function` is an expression in `x1`, `x2`, `t` for `passive` and
 * must be NULL otherwise. `nu = 0` disables hyperdissipation.
 *
 * # Safety
 * String arguments must be NULL or NUL-terminated; `out` must be writable.
 */
enum SfStatus sf_model_new(const char *kind,
                           const char *stream_function,
                           size_t n1,
                           size_t n2,
                           double nu,
                           uint32_t p,
                           struct SfModel **out);

/**
 * # Safety
 * `model` must be NULL or a handle from [`sf_model_new`] not yet freed.
 */
void sf_model_free(struct SfModel *model);

/**
 * Grid sizes of a model.
 *
 * # Safety
 * `model` must be a live handle; `n1` and `n2` must be writable.
 */
enum SfStatus sf_model_grid(const struct SfModel *model, size_t *n1, size_t *n2);

/**
 * Builds a state from named built-in initial data (see `sharpfront scenarios`).
 *
 * # Safety
 * `model` must be a live handle, `name` NUL-terminated, `out` writable.
 */
enum SfStatus sf_state_new_scenario(const struct SfModel *model,
                                    const char *name,
                                    struct SfState **out);

/**
 * Builds a state from caller-owned arrays of `n1 * n2` doubles. Pass NULL
 * for a field the model does not carry.
 *
 * # Safety
 * Non-NULL `theta` and `omega` must point to `n1 * n2` readable doubles.
 */
enum SfStatus sf_state_new_fields(const struct SfModel *model,
                                  const double *theta,
                                  const double *omega,
                                  double t,
                                  struct SfState **out);

/**
 * # Safety
 * `state` must be NULL or a live state handle.
 */
void sf_state_free(struct SfState *state);

/**
 * # Safety
 * `state` must be a live handle; `t` writable.
 */
enum SfStatus sf_state_time(const struct SfState *state, double *t);

/**
 * Copies the field `name` (`theta` or `omega`) into `buf`, which must hold
 * exactly `len == n1 * n2` doubles.
 *
 * # Safety
 * `buf` must point to `len` writable doubles.
 */
enum SfStatus sf_state_copy_field(const struct SfState *state,
                                  const char *name,
                                  double *buf,
                                  size_t len);

/**
 * Largest stable step for `state` under the given CFL factor and cap.
 *
 * # Safety
 * Handles must be live; `dt` writable.
 */
enum SfStatus sf_stable_dt(const struct SfModel *model,
                           const struct SfState *state,
                           double cfl,
                           double dt_max,
                           double *dt);

/**
 * Advances `state` in place by one RK4 step of size `dt`. On failure the
 * state is left unchanged.
 *
 * # Safety
 * Handles must be live and `state` not aliased elsewhere during the call.
 */
enum SfStatus sf_step(const struct SfModel *model, struct SfState *state, double dt);

/**
 * Extracts the two front graphs of `theta` over `[a, b]` at `samples`
 * equally spaced columns. Each output array must hold `samples` doubles.
 *
 * # Safety
 * `x1`, `f_plus`, `f_minus` must each point to `samples` writable doubles.
 */
enum SfStatus sf_extract_front(const struct SfState *state,
                               double level_plus,
                               double level_minus,
                               double a,
                               double b,
                               double seed_plus,
                               double seed_minus,
                               size_t samples,
                               double *x1,
                               double *f_plus,
                               double *f_minus);

/**
 * Runs `sharpfront simulate` on TOML text. `out_dir` may be NULL to use the
 * directory from the config. `exit_code` receives the command-line exit
 * status (0 clean, 2 blow-up, 3 collapse, 4 breakdown); a run that ends in
 * one of those events still returns `SF_OK`.
 *
 * # Safety
 * Strings must be NUL-terminated; `exit_code` writable.
 */
enum SfStatus sf_simulate(const char *config, const char *out_dir, int32_t *exit_code);

/**
 * Runs `sharpfront diagnose` over the snapshots in `run_dir` with the
 * front specification given as TOML text. `out_dir` may be NULL.
 *
 * # Safety
 * Strings must be NUL-terminated.
 */
enum SfStatus sf_diagnose(const char *run_dir, const char *frontspec, const char *out_dir);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SHARPFRONT_H */
