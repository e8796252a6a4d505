#ifndef MEMSIM_H
#define MEMSIM_H

/* Generated by cbindgen; do not edit by hand. */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Terminal classification of a trajectory.
 */
typedef enum MemsimRunStatus {
  MEMSIM_RUN_STATUS_RUNNING = 0,
  MEMSIM_RUN_STATUS_TIME_LIMIT = 1,
  MEMSIM_RUN_STATUS_TOUCHDOWN = 2,
  MEMSIM_RUN_STATUS_GRADIENT_BLOWUP = 3,
} MemsimRunStatus;

/**
 * Status codes mirroring the CLI exit-code contract.
 */
typedef enum MemsimStatusCode {
  MEMSIM_STATUS_CODE_OK = 0,
  MEMSIM_STATUS_CODE_NULL_ARGUMENT = 1,
  MEMSIM_STATUS_CODE_CONFIG_ERROR = 2,
  MEMSIM_STATUS_CODE_CERTIFICATE_FAILURE = 3,
  MEMSIM_STATUS_CODE_SOLVER_FAILURE = 4,
} MemsimStatusCode;

/**
 * Opaque simulation configuration handle.
 */
typedef struct MemsimConfig MemsimConfig;

/**
 * Opaque trajectory handle.
 */
typedef struct MemsimTrajectory MemsimTrajectory;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Returns the message of the most recent error on this thread. The pointer
 * stays valid until the next failing call on the same thread.
 */
const char *memsim_last_error(void);

/**
 * Creates a configuration populated with the documented defaults.
 */
struct MemsimConfig *memsim_config_new(void);

/**
 * Parses a flat `key = value` file on top of the defaults.
 *
 * # Safety
 * `path` must be a valid NUL-terminated string.
 */
struct MemsimConfig *memsim_config_from_file(const char *path);

/**
 * Applies one `key`/`value` assignment to the configuration.
 *
 * # Safety
 * `key` and `value` must be valid NUL-terminated strings; `config` must be
 * a live handle from this library.
 */
enum MemsimStatusCode memsim_config_set(struct MemsimConfig *config,
                                        const char *key,
                                        const char *value);

/**
 * Frees a configuration handle. Accepts null.
 *
 * # Safety
 * `config` must be null or a live handle from this library, not yet freed.
 */
void memsim_config_free(struct MemsimConfig *config);

/**
 * Runs one trajectory. `small_gap` nonzero forces the reduced model;
 * epsilon = 0 selects it automatically. On success `*out` receives an
 * owned trajectory handle.
 *
 * # Safety
 * `config` must be a live handle; `out` must point to writable storage.
 */
enum MemsimStatusCode memsim_run(const struct MemsimConfig *config,
                                 int32_t small_gap,
                                 struct MemsimTrajectory **out);

/**
 * Frees a trajectory handle. Accepts null.
 *
 * # Safety
 * `traj` must be null or a live handle from this library, not yet freed.
 */
void memsim_trajectory_free(struct MemsimTrajectory *traj);

/**
 * Terminal status of the run.
 *
 * # Safety
 * `traj` must be a live trajectory handle.
 */
enum MemsimRunStatus memsim_trajectory_status(const struct MemsimTrajectory *traj);

/**
 * Final simulated time.
 *
 * # Safety
 * `traj` must be a live trajectory handle.
 */
double memsim_trajectory_t_end(const struct MemsimTrajectory *traj);

/**
 * Breakdown time, or NaN when the run hit the time limit cleanly.
 *
 * # Safety
 * `traj` must be a live trajectory handle.
 */
double memsim_trajectory_t_event(const struct MemsimTrajectory *traj);

/**
 * Final minimum of 1 + u.
 *
 * # Safety
 * `traj` must be a live trajectory handle.
 */
double memsim_trajectory_min_gap(const struct MemsimTrajectory *traj);

/**
 * Total number of evaluated certificates.
 *
 * # Safety
 * `traj` must be a live trajectory handle.
 */
uintptr_t memsim_trajectory_certificates_total(const struct MemsimTrajectory *traj);

/**
 * Number of failed certificates.
 *
 * # Safety
 * `traj` must be a live trajectory handle.
 */
uintptr_t memsim_trajectory_certificates_failed(const struct MemsimTrajectory *traj);

/**
 * A priori blow-up time bound, or NaN when none applies.
 *
 * # Safety
 * `traj` must be a live trajectory handle.
 */
double memsim_trajectory_blowup_bound(const struct MemsimTrajectory *traj);

/**
 * Pull-in threshold of the small-gap steady problem on an `nx`-node grid.
 * Writes λ* through `out_lambda`.
 *
 * # Safety
 * `out_lambda` must point to writable storage.
 */
enum MemsimStatusCode memsim_pullin_threshold(uintptr_t nx, double tol, double *out_lambda);

/**
 * Library version string.
 */
const char *memsim_version(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* MEMSIM_H */
