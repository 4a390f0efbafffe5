#ifndef ADHYP_H
#define ADHYP_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stddef.h>
#include <stdint.h>

/*
 Outcome of a call.
 */
typedef enum AdhypStatus {
  ADHYP_STATUS_OK = 0,
  ADHYP_STATUS_NULL_POINTER = 1,
  ADHYP_STATUS_INVALID_ARGUMENT = 2,
  ADHYP_STATUS_UNKNOWN_PROBLEM = 3,
  /*
   A state with non-positive density or pressure was met.
   */
  ADHYP_STATUS_INVALID_STATE = 4,
  ADHYP_STATUS_SOLVER_ABORTED = 5,
  /*
   The destination buffer holds fewer values than the mesh has cells.
   */
  ADHYP_STATUS_BUFFER_TOO_SMALL = 6,
  ADHYP_STATUS_IO_ERROR = 7,
  /*
   A panic was caught at the boundary. The handle involved should be
   freed and not used further.
   */
  ADHYP_STATUS_PANIC = 8,
} AdhypStatus;

/*
 Opaque solver handle.
 */
typedef struct AdhypSolver AdhypSolver;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/*
 Creates a solver for a catalog problem at `t = 0`.

 `scheme` is `"new"`, `"old"` or `"fixed:<tau>"`; NULL means `"new"`.
 A non-positive or NaN `c` selects the problem's default adaption constant.
 `nx` or `ny` equal to zero selects the default mesh size in that
 direction; `ny` is ignored for 1-D problems.

 # Safety
 `problem_id` must be a valid NUL-terminated string, `scheme` NULL or a
 valid NUL-terminated string, and `out` a valid pointer to writable
 storage for one handle.
 */
enum AdhypStatus adhyp_solver_new(const char *problem_id,
                                  const char *scheme,
                                  double c,
                                  size_t nx,
                                  size_t ny,
                                  struct AdhypSolver **out);

/*
 Releases a handle. NULL is ignored.

 # Safety
 `handle` must be NULL or a pointer returned by [`adhyp_solver_new`] that
 has not been freed yet.
 */
void adhyp_solver_free(struct AdhypSolver *handle);

/*
 Advances one step of the CFL-limited size. The step taken is written
 to `dt_out` unless it is NULL.

 # Safety
 `handle` must be a live handle; `dt_out` NULL or valid for one write.
 */
enum AdhypStatus adhyp_solver_step(struct AdhypSolver *handle, double *dt_out);

/*
 Marches to `t_target`, landing on it exactly.

 # Safety
 `handle` must be a live handle.
 */
enum AdhypStatus adhyp_solver_advance_to(struct AdhypSolver *handle, double t_target);

/*
 # Safety
 `handle` must be a live handle and `out` valid for one write.
 */
enum AdhypStatus adhyp_solver_time(const struct AdhypSolver *handle, double *out);

/*
 Number of steps taken and positivity fallbacks used so far.

 # Safety
 `handle` must be a live handle; `steps` and `fallbacks` NULL or valid
 for one write each.
 */
enum AdhypStatus adhyp_solver_counters(const struct AdhypSolver *handle,
                                       uint64_t *steps,
                                       uint64_t *fallbacks);

/*
 Interior mesh size; `ny` is 1 for 1-D problems.

 # Safety
 `handle` must be a live handle; `nx` and `ny` valid for one write each.
 */
enum AdhypStatus adhyp_solver_shape(const struct AdhypSolver *handle, size_t *nx, size_t *ny);

/*
 Cell-average densities, x fastest, into `buf` of `len` values.

 # Safety
 `handle` must be a live handle and `buf` valid for `len` writes.
 */
enum AdhypStatus adhyp_solver_copy_density(const struct AdhypSolver *handle,
                                           double *buf,
                                           size_t len);

/*
 Per-cell limiter parameter `tau` of the current state, x fastest.

 # Safety
 `handle` must be a live handle and `buf` valid for `len` writes.
 */
enum AdhypStatus adhyp_solver_copy_tau(const struct AdhypSolver *handle, double *buf, size_t len);

/*
 Copies the calling thread's last error message into `buf` (truncated,
 always NUL-terminated when `len > 0`) and returns the full message length
 without the terminator. Returns 0 when there is no message.

 # Safety
 `buf` must be NULL or valid for `len` writes.
 */
size_t adhyp_last_error_message(char *buf, size_t len);

/*
 Limiter function `phi(r)`. NaN when `theta` or `tau` is out of range.
 */
double adhyp_phi_sbm(double r, double theta, double tau);

/*
 Continuous map from the averaged indicator to `tau`.
 */
double adhyp_tau_new(double e_bar, double c);

/*
 Two-valued switch from the averaged indicator to `tau`.
 */
double adhyp_tau_old(double e_bar, double c);

/*
 Library version as a static NUL-terminated string.
 */
const char *adhyp_version(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* ADHYP_H */
