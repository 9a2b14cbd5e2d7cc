#ifndef WDISTILL_H
#define WDISTILL_H

/* Generated by cbindgen from src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum WdChannel {
  WD_CHANNEL_DEPHASING = 0,
  WD_CHANNEL_DEPOLARIZING = 1,
} WdChannel;

typedef enum WdClassification {
  WD_CLASSIFICATION_W = 0,
  WD_CLASSIFICATION_BELL = 1,
  WD_CLASSIFICATION_UNDISTILLABLE = 2,
  WD_CLASSIFICATION_TRANSIENT = 3,
} WdClassification;

typedef enum WdPlacement {
  WD_PLACEMENT_PER_PARTY = 0,
  WD_PLACEMENT_PER_COPY = 1,
} WdPlacement;

/**
 * Status code returned by every fallible function.
 */
typedef enum WdStatus {
  WD_STATUS_OK = 0,
  WD_STATUS_NULL_POINTER = 1,
  WD_STATUS_INVALID_INPUT = 2,
  WD_STATUS_DEGENERATE_OUTCOME = 3,
  WD_STATUS_SAMPLING_FAILED = 4,
  WD_STATUS_BUFFER_TOO_SMALL = 5,
  WD_STATUS_PANIC = 6,
} WdStatus;

typedef enum WdSubprotocol {
  WD_SUBPROTOCOL_P = 0,
  WD_SUBPROTOCOL_P_BAR = 1,
} WdSubprotocol;

/**
 * Opaque 3-qubit density matrix.
 */
typedef struct WdState WdState;

/**
 * Opaque result of a recurrence run.
 */
typedef struct WdTrajectory WdTrajectory;

/**
 * One subprotocol application.
 */
typedef struct WdStep {
  double fidelity;
  double p_success;
  enum WdSubprotocol subprotocol;
} WdStep;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Copies the last error message of this thread into `buf` (NUL-terminated,
 * truncated to `len`). Returns the full message length without the NUL.
 *
 * # Safety
 * `buf` must be null or point to `len` writable bytes.
 */
size_t wd_last_error_message(char *buf, size_t len);

/**
 * Library version as a static NUL-terminated string.
 */
const char *wd_version(void);

/**
 * Locally dephased or depolarized W state with fidelity `fidelity`.
 *
 * # Safety
 * `out` must be a valid pointer to a handle slot.
 */
enum WdStatus wd_state_noisy_w(enum WdChannel channel, double fidelity, struct WdState **out);

/**
 * Builds a state from a row-major `dim × dim` matrix given as separate
 * real and imaginary parts. The matrix must be Hermitian with unit trace.
 *
 * # Safety
 * `re` and `im` must point to `dim * dim` readable doubles; `out` must be
 * a valid pointer to a handle slot.
 */
enum WdStatus wd_state_from_matrix(const double *re,
                                   const double *im,
                                   size_t dim,
                                   struct WdState **out);

/**
 * Releases a state handle. Null is ignored.
 *
 * # Safety
 * `state` must be null or a handle not yet freed.
 */
void wd_state_free(struct WdState *state);

/**
 * `⟨W^000|ρ|W^000⟩`.
 *
 * # Safety
 * `state` must be a live handle and `out` writable.
 */
enum WdStatus wd_state_fidelity(const struct WdState *state, double *out);

/**
 * Copies the matrix into row-major `re`/`im` buffers of `len` entries
 * each (64 needed).
 *
 * # Safety
 * `state` must be a live handle; `re` and `im` must hold `len` doubles.
 */
enum WdStatus wd_state_matrix(const struct WdState *state, double *re, double *im, size_t len);

/**
 * One application of the W-basis subprotocol. The output state is a new
 * handle.
 *
 * # Safety
 * `state` must be a live handle; both output pointers must be writable.
 */
enum WdStatus wd_run_p(const struct WdState *state,
                       struct WdState **out_state,
                       struct WdStep *out_step);

/**
 * One application of the dual-basis subprotocol.
 *
 * # Safety
 * As for [`wd_run_p`].
 */
enum WdStatus wd_run_pbar(const struct WdState *state,
                          enum WdPlacement placement,
                          struct WdState **out_state,
                          struct WdStep *out_step);

/**
 * Iterates the recurrence until `target` fidelity, a fixed point, or
 * `max_steps`.
 *
 * # Safety
 * `state` must be a live handle and `out` a valid pointer to a handle slot.
 */
enum WdStatus wd_distill_run(const struct WdState *state,
                             size_t max_steps,
                             double target,
                             enum WdPlacement placement,
                             struct WdTrajectory **out);

/**
 * Releases a trajectory handle. Null is ignored.
 *
 * # Safety
 * `traj` must be null or a handle not yet freed.
 */
void wd_trajectory_free(struct WdTrajectory *traj);

/**
 * Number of recurrence steps taken.
 *
 * # Safety
 * `traj` must be a live handle and `out` writable.
 */
enum WdStatus wd_trajectory_steps(const struct WdTrajectory *traj, size_t *out);

/**
 * Fidelity before the first step and after every step (`steps + 1`
 * values). `written` receives the number needed even when `len` is short.
 *
 * # Safety
 * `traj` must be a live handle; `buf` must hold `len` doubles; `written`
 * must be writable.
 */
enum WdStatus wd_trajectory_fidelities(const struct WdTrajectory *traj,
                                       double *buf,
                                       size_t len,
                                       size_t *written);

/**
 * Branch the run ended in.
 *
 * # Safety
 * `traj` must be a live handle and `out` writable.
 */
enum WdStatus wd_trajectory_classification(const struct WdTrajectory *traj,
                                           enum WdClassification *out);

/**
 * Expected yield `Π p_i / 3^k`.
 *
 * # Safety
 * `traj` must be a live handle and `out` writable.
 */
enum WdStatus wd_trajectory_yield(const struct WdTrajectory *traj, double *out);

/**
 * Copy of the last state of the run as a new handle.
 *
 * # Safety
 * `traj` must be a live handle and `out` a valid pointer to a handle slot.
 */
enum WdStatus wd_trajectory_final_state(const struct WdTrajectory *traj, struct WdState **out);

/**
 * Closed-form output fidelity and success probability for three dephased
 * W states of fidelity `f`.
 *
 * # Safety
 * `out_f` and `out_p` must be writable.
 */
enum WdStatus wd_dephasing_map(double f, double *out_f, double *out_p);

/**
 * Bisected retrieval threshold of a noise family.
 *
 * # Safety
 * `out_threshold` and `out_width` must be writable.
 */
enum WdStatus wd_retrieval_threshold(enum WdChannel channel,
                                     double resolution,
                                     enum WdPlacement placement,
                                     double *out_threshold,
                                     double *out_width);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* WDISTILL_H */
