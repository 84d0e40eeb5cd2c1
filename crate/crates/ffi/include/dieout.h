#ifndef DIEOUT_H
#define DIEOUT_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stddef.h>
#include <stdint.h>

// Result of every call. Values mirror the command-line exit codes where one exists.
typedef enum DieoutStatus {
  DIEOUT_STATUS_OK = 0,
  DIEOUT_STATUS_FAILURE = 1,
  DIEOUT_STATUS_PARSE = 2,
  DIEOUT_STATUS_TOO_LARGE = 3,
  DIEOUT_STATUS_ALL_BALANCED = 4,
  DIEOUT_STATUS_TRIVIAL_KERNEL = 5,
  DIEOUT_STATUS_CENSUS_FAILURE = 6,
  DIEOUT_STATUS_BETA_MISMATCH = 7,
  DIEOUT_STATUS_BLOWUP = 9,
  DIEOUT_STATUS_NULL_POINTER = 20,
  DIEOUT_STATUS_INVALID_UTF8 = 21,
  DIEOUT_STATUS_OUT_OF_RANGE = 22,
  DIEOUT_STATUS_PANIC = 99,
} DieoutStatus;

// A parsed system with its signal and simulation settings.
typedef struct DieoutSystem DieoutSystem;

// A simulated or loaded trajectory.
typedef struct DieoutTrajectory DieoutTrajectory;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message for the most recent failed call on this thread; empty after a
// success. Valid until the next call on the same thread.
const char *dieout_last_error(void);

// Library version as a static string.
const char *dieout_version(void);

// Releases a string returned by this library. Null is ignored.
//
// # Safety
// `s` must come from this library and not be freed twice.
void dieout_string_free(char *s);

// Parses a JSON config into a new system handle.
//
// # Safety
// `json` must be a NUL-terminated string; `out` must be writable.
enum DieoutStatus dieout_system_from_json(const char *json, struct DieoutSystem **out);

// # Safety
// `sys` must come from [`dieout_system_from_json`] and not be freed twice.
void dieout_system_free(struct DieoutSystem *sys);

// Number of species `d`, or 0 for a null handle.
//
// # Safety
// `sys` must be null or a live handle.
size_t dieout_system_dim(const struct DieoutSystem *sys);

// Replaces growth coefficient `index` (1-based) with a rational literal
// such as `"-3/5"` or `"0.29"`.
//
// # Safety
// `sys` must be a live handle; `value` a NUL-terminated string.
enum DieoutStatus dieout_system_set_c(struct DieoutSystem *sys, size_t index, const char *value);

// Team report as JSON (same document as `dieout team`).
//
// # Safety
// `sys` must be a live handle; `out` writable.
enum DieoutStatus dieout_team_json(const struct DieoutSystem *sys, char **out);

// Trophic check and trapping region as JSON (same document as `dieout check-trophic`).
//
// # Safety
// `sys` must be a live handle; `out` writable.
enum DieoutStatus dieout_trophic_json(const struct DieoutSystem *sys, char **out);

// Certificates for bound `beta` as JSON (same document as `dieout certify`).
//
// # Safety
// `sys` must be a live handle; `out` writable.
enum DieoutStatus dieout_certify_json(const struct DieoutSystem *sys, double beta, char **out);

// Integrates the system with its configured settings.
//
// # Safety
// `sys` must be a live handle; `out` writable.
enum DieoutStatus dieout_simulate(const struct DieoutSystem *sys, struct DieoutTrajectory **out);

// Loads a trajectory CSV (`t,x1..xd[,z..]`) for a system with `d` species.
//
// # Safety
// `csv` must be a NUL-terminated string; `out` writable.
enum DieoutStatus dieout_trajectory_from_csv(const char *csv,
                                             size_t d,
                                             struct DieoutTrajectory **out);

// # Safety
// `traj` must come from this library and not be freed twice.
void dieout_trajectory_free(struct DieoutTrajectory *traj);

// Number of retained samples, or 0 for a null handle.
//
// # Safety
// `traj` must be null or a live handle.
size_t dieout_trajectory_len(const struct DieoutTrajectory *traj);

// Largest coordinate seen during the run, or NaN for a null handle.
//
// # Safety
// `traj` must be null or a live handle.
double dieout_trajectory_beta(const struct DieoutTrajectory *traj);

// Copies sample `index` into `t` and `x[0..xlen]`; `xlen` must equal `d`.
//
// # Safety
// `traj` must be a live handle; `t` writable; `x` writable for `xlen` doubles.
enum DieoutStatus dieout_trajectory_sample(const struct DieoutTrajectory *traj,
                                           size_t index,
                                           double *t,
                                           double *x,
                                           size_t xlen);

// Trajectory as CSV text.
//
// # Safety
// `traj` must be a live handle; `out` writable.
enum DieoutStatus dieout_trajectory_csv(const struct DieoutTrajectory *traj, char **out);

// Census of the trajectory against the team certificates. A `beta` that is
// not positive selects the trajectory's own bound. The report is written to
// `out` even when the census fails, in which case the status is
// `CensusFailure`.
//
// # Safety
// `sys` and `traj` must be live handles; `out` writable.
enum DieoutStatus dieout_verify_json(const struct DieoutSystem *sys,
                                     const struct DieoutTrajectory *traj,
                                     double beta,
                                     char **out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* DIEOUT_H */
