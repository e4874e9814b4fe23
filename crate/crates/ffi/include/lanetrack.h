#ifndef LANETRACK_H
#define LANETRACK_H

/* Generated by cbindgen; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum LtStatus {
  LT_STATUS_OK = 0,
  LT_STATUS_NULL_ARGUMENT = 1,
  LT_STATUS_INVALID_UTF8 = 2,
  /**
   * Malformed JSON, unknown override key or a value outside its domain.
   */
  LT_STATUS_INVALID_INPUT = 3,
  /**
   * Degenerate geometry or numerics, e.g. too few points for a fit.
   */
  LT_STATUS_NUMERICAL = 4,
  LT_STATUS_IO = 5,
  LT_STATUS_OUT_OF_RANGE = 6,
  LT_STATUS_BUFFER_TOO_SMALL = 7,
  LT_STATUS_PANIC = 8,
} LtStatus;

typedef enum LtTermination {
  LT_TERMINATION_LAP_COMPLETE = 0,
  LT_TERMINATION_FINISHED = 1,
  LT_TERMINATION_TIMEOUT = 2,
  LT_TERMINATION_UNRECORDED = 3,
} LtTermination;

/**
 * Opaque simulation log handle.
 */
typedef struct LtLog LtLog;

/**
 * Opaque scenario handle.
 */
typedef struct LtScenario LtScenario;

/**
 * One simulation step. Target and error fields are NaN when absent.
 */
typedef struct LtRecord {
  double t;
  double x;
  double y;
  double phi;
  double v_cmd;
  double omega_cmd;
  double v_app;
  double omega_app;
  double x_t;
  double y_t;
  double phi_t;
  double phi_t_dot;
  double rho;
  double alpha;
  double beta;
  double v1;
  double v2;
  uint32_t flags;
} LtRecord;

typedef struct LtMetrics {
  double completion_time;
  double avg_linear_speed;
  double avg_angular_speed;
  double mae_lateral;
  double mae_orientation;
  double rmse_linear_speed;
  double linear_speed_deviation_pct;
  double accumulated_orientation;
} LtMetrics;

/**
 * `y = c0 + c1 x + c2 x^2 + c3 x^3`, valid on `[x_lo, x_hi]`.
 */
typedef struct LtCubic {
  double coeffs[4];
  double x_lo;
  double x_hi;
  uint32_t degree;
  double residual_norm;
} LtCubic;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static NUL-terminated string.
 */
const char *lt_version(void);

/**
 * Copies the calling thread's last error message into `buf` (NUL-terminated,
 * truncated to `len` bytes) and returns the full message length excluding
 * the terminator; 0 when there is no message.
 *
 * # Safety
 * `buf` must be null or writable for `len` bytes.
 */
size_t lt_last_error_message(char *buf, size_t len);

/**
 * Parses a scenario from JSON. Missing fields take their defaults.
 *
 * # Safety
 * `json` must be a NUL-terminated string; `out` must be writable.
 */
enum LtStatus lt_scenario_from_json(const char *json, struct LtScenario **out);

/**
 * Applies a `dotted.key=value` override in place.
 *
 * # Safety
 * `sc` must be a live scenario handle; `assignment` a NUL-terminated string.
 */
enum LtStatus lt_scenario_set(struct LtScenario *sc, const char *assignment);

/**
 * Serialises the scenario as JSON into a newly allocated string, released
 * with [`lt_string_free`].
 *
 * # Safety
 * `sc` must be a live scenario handle; `out` must be writable.
 */
enum LtStatus lt_scenario_to_json(const struct LtScenario *sc, char **out);

/**
 * # Safety
 * `s` must be null or a string returned by this library, not yet freed.
 */
void lt_string_free(char *s);

/**
 * # Safety
 * `sc` must be null or a live scenario handle, not used afterwards.
 */
void lt_scenario_free(struct LtScenario *sc);

/**
 * Runs the scenario to termination.
 *
 * # Safety
 * `sc` must be a live scenario handle; `out` must be writable.
 */
enum LtStatus lt_run(const struct LtScenario *sc, struct LtLog **out);

/**
 * Number of records; 0 for a null handle.
 *
 * # Safety
 * `log` must be null or a live log handle.
 */
size_t lt_log_len(const struct LtLog *log);

/**
 * # Safety
 * `log` must be a live log handle.
 */
enum LtTermination lt_log_termination(const struct LtLog *log);

/**
 * Copies record `index` into `out`.
 *
 * # Safety
 * `log` must be a live log handle; `out` must be writable.
 */
enum LtStatus lt_log_record(const struct LtLog *log, size_t index, struct LtRecord *out);

/**
 * Writes the log as CSV to `path`.
 *
 * # Safety
 * `log` must be a live log handle; `path` a NUL-terminated string.
 */
enum LtStatus lt_log_write_csv(const struct LtLog *log, const char *path);

/**
 * # Safety
 * `log` must be null or a live log handle, not used afterwards.
 */
void lt_log_free(struct LtLog *log);

/**
 * Path-tracking metrics of `log` against the scenario's track and speed.
 *
 * # Safety
 * `log` and `sc` must be live handles; `out` must be writable.
 */
enum LtStatus lt_metrics(const struct LtLog *log,
                         const struct LtScenario *sc,
                         struct LtMetrics *out);

/**
 * Least-squares cubic through `n` samples.
 *
 * # Safety
 * `xs` and `ys` must be readable for `n` values; `out` must be writable.
 */
enum LtStatus lt_fit_cubic(const double *xs, const double *ys, size_t n, struct LtCubic *out);

/**
 * Cubic `theta(t)` with `theta(0) = theta0`, `theta(t0) = theta_t` and end
 * rates `rate0`, `rate_t`; coefficients in ascending powers.
 *
 * # Safety
 * `out` must be writable for four values.
 */
enum LtStatus lt_boundary_cubic(double theta0,
                                double theta_t,
                                double rate0,
                                double rate_t,
                                double t0,
                                double *out);

/**
 * Resamples `n` interleaved `x, y` points at arc-length spacing `delta_s`.
 * The required point count is stored in `out_len`; when it exceeds `cap`
 * nothing is written and `BufferTooSmall` is returned.
 *
 * # Safety
 * `pts` must be readable for `2 n` values, `out` writable for `2 cap`
 * values (may be null when `cap` is 0), and `out_len` writable.
 */
enum LtStatus lt_resample(const double *pts,
                          size_t n,
                          double delta_s,
                          double *out,
                          size_t cap,
                          size_t *out_len);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* LANETRACK_H */
