/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#ifndef MAEE_H
#define MAEE_H

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/*
 Optimization scheme.
 */
typedef enum MaeeScheme {
  MAEE_SCHEME_MA = 0,
  MAEE_SCHEME_TMA = 1,
  MAEE_SCHEME_RMA = 2,
  MAEE_SCHEME_DPS = 3,
  MAEE_SCHEME_UPA = 4,
  MAEE_SCHEME_MA_LOS = 5,
  MAEE_SCHEME_SINGLE_USER = 6,
} MaeeScheme;

/*
 Result code of every fallible call.
 */
typedef enum MaeeStatus {
  MAEE_STATUS_OK = 0,
  MAEE_STATUS_NULL_POINTER = 1,
  MAEE_STATUS_INVALID_ARGUMENT = 2,
  MAEE_STATUS_CONFIG = 3,
  MAEE_STATUS_INFEASIBLE = 4,
  MAEE_STATUS_NUMERICAL = 5,
  MAEE_STATUS_PANIC = 6,
} MaeeStatus;

/*
 Outcome of one optimization run.
 */
typedef struct MaeeResult MaeeResult;

/*
 Sampled scenario: configuration plus drawn statistics.
 */
typedef struct MaeeScenario MaeeScenario;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/*
 Static, NUL-terminated version string.
 */
const char *maee_version(void);

/*
 Message of the last failed call on this thread, or null. The pointer
 stays valid until the next call on the same thread.
 */
const char *maee_last_error_message(void);

/*
 Creates a scenario from a TOML document with a `[scenario]` table and
 optional `[knobs]` table, or the reference operating point when `toml`
 is null, and draws its statistics from `seed`.

 # Safety
 `toml` must be null or a valid NUL-terminated string; `out` must be a
 valid pointer to writable storage for one handle.
 */
enum MaeeStatus maee_scenario_new(const char *toml, uint64_t seed, struct MaeeScenario **out);

/*
 Releases a scenario; null is ignored.

 # Safety
 `scenario` must be null or a handle from [`maee_scenario_new`] that has
 not been freed.
 */
void maee_scenario_free(struct MaeeScenario *scenario);

/*
 Antenna and user counts of a scenario.

 # Safety
 `scenario` must be a live handle; each output pointer must be null or
 writable.
 */
enum MaeeStatus maee_scenario_dims(const struct MaeeScenario *scenario,
                                   uintptr_t *n_tx,
                                   uintptr_t *n_rx,
                                   uintptr_t *n_users);

/*
 Runs the alternating optimization for `scheme`.

 # Safety
 `scenario` must be a live handle and `out` writable storage for one
 handle.
 */
enum MaeeStatus maee_run(const struct MaeeScenario *scenario,
                         enum MaeeScheme scheme,
                         struct MaeeResult **out);

/*
 Releases a result; null is ignored.

 # Safety
 `result` must be null or a handle from [`maee_run`] that has not been
 freed.
 */
void maee_result_free(struct MaeeResult *result);

/*
 Final DE energy efficiency (nats/J/Hz), sum rate (nats/s/Hz), transmit
 power (W) and executed outer iterations. Null outputs are skipped.

 # Safety
 `result` must be a live handle; each output pointer must be null or
 writable.
 */
enum MaeeStatus maee_result_summary(const struct MaeeResult *result,
                                    double *ee,
                                    double *sum_rate,
                                    double *tx_power,
                                    uintptr_t *iterations);

/*
 Copies the energy-efficiency trace (initial point first) into `buf`.
 `written` receives the full trace length even when `len` is too small,
 in which case nothing is copied and `INVALID_ARGUMENT` is returned.

 # Safety
 `result` must be a live handle; `buf` must be valid for `len` writes
 and `written` writable.
 */
enum MaeeStatus maee_result_ee_trace(const struct MaeeResult *result,
                                     double *buf,
                                     uintptr_t len,
                                     uintptr_t *written);

/*
 Final transmit positions; `len` must equal the transmit antenna count.

 # Safety
 `result` must be a live handle; `x` and `y` must be valid for `len`
 writes.
 */
enum MaeeStatus maee_result_tx_positions(const struct MaeeResult *result,
                                         double *x,
                                         double *y,
                                         uintptr_t len);

/*
 Final receive positions of `user`; `len` must equal the receive antenna
 count.

 # Safety
 `result` must be a live handle; `x` and `y` must be valid for `len`
 writes.
 */
enum MaeeStatus maee_result_rx_positions(const struct MaeeResult *result,
                                         uintptr_t user,
                                         double *x,
                                         double *y,
                                         uintptr_t len);

/*
 Sample-mean energy efficiency (nats/J/Hz) of a result on its scenario.

 # Safety
 `scenario` and `result` must be live handles, the result produced from
 that scenario; `ee` must be writable.
 */
enum MaeeStatus maee_result_mc_ee(const struct MaeeScenario *scenario,
                                  const struct MaeeResult *result,
                                  uintptr_t samples,
                                  uint64_t seed,
                                  double *ee);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* MAEE_H */
