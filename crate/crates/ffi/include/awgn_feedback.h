#ifndef AWGN_FEEDBACK_H
#define AWGN_FEEDBACK_H

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result of every fallible call.
 */
typedef enum AwgnStatus {
  AWGN_STATUS_OK = 0,
  AWGN_STATUS_NULL_POINTER = 1,
  AWGN_STATUS_INVALID_ARGUMENT = 2,
  AWGN_STATUS_CONFIG = 3,
  AWGN_STATUS_RUNTIME = 4,
  AWGN_STATUS_PANIC = 5,
} AwgnStatus;

/**
 * Transmission strategy of a run.
 */
typedef enum AwgnScheme {
  AWGN_SCHEME_FEEDBACK_ONE_SWITCH = 0,
  AWGN_SCHEME_BASELINE_NO_FEEDBACK = 1,
  AWGN_SCHEME_NAIVE_FEEDBACK = 2,
} AwgnScheme;

/**
 * Run configuration under construction.
 */
typedef struct AwgnParams AwgnParams;

/**
 * Validated configuration with prebuilt codes.
 */
typedef struct AwgnSimulator AwgnSimulator;

/**
 * Aggregate outcome of a run.
 */
typedef struct AwgnRunStats {
  uint64_t trials;
  uint64_t errors;
  double p_hat;
  /**
   * 95% Clopper-Pearson interval.
   */
  double ci_low;
  double ci_high;
  /**
   * `-ln(p_hat)/n`, NaN when no errors were observed.
   */
  double exponent_hat;
  double k2_freq;
  double k3_freq;
  double k4_freq;
  double coord_fail_freq;
  double wall_clock_secs;
} AwgnRunStats;

/**
 * Summary of one session.
 */
typedef struct AwgnSession {
  uint64_t true_message;
  uint64_t decision;
  bool correct;
  /**
   * Selected group size, 0 for the baseline.
   */
  uint32_t group_size;
  bool coordination_failure;
  double energy;
} AwgnSession;

/**
 * Closed-form exponent coefficients; case values are in phase-I energy units.
 */
typedef struct AwgnExponentReport {
  double e_k2;
  double e_k0;
  double e_s2;
  double e_s3;
  double e_s4;
  double e_k3;
  double e_k3_floor;
  double e_k4;
  double overall;
  double case_minimum;
  /**
   * Overall exponent per channel use.
   */
  double overall_per_n;
  double theorem;
  bool theorem_vacuous;
  bool windows_ok;
} AwgnExponentReport;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static NUL-terminated string.
 */
const char *awgn_version(void);

/**
 * Message of the last failed call on this thread, or NULL. Valid until the
 * next call into the library on the same thread.
 */
const char *awgn_last_error_message(void);

/**
 * Creates a parameter set with default values.
 *
 * # Safety
 * `out` must be a valid pointer to writable storage.
 */
enum AwgnStatus awgn_params_new(struct AwgnParams **out);

/**
 * Creates a parameter set from a flat JSON configuration.
 *
 * # Safety
 * `json` must be a NUL-terminated string and `out` a valid pointer.
 */
enum AwgnStatus awgn_params_from_json(const char *json, struct AwgnParams **out);

/**
 * Releases a parameter set; NULL is ignored.
 *
 * # Safety
 * `params` must come from this library and not be used afterwards.
 */
void awgn_params_free(struct AwgnParams *params);

/**
 * Sets one numeric configuration key: `A`, `sigma`, `sigma2`, `n`, `M`,
 * `beta`, `tau2`, `tau3`, `trials`, `seed`, `decoder.samples` or
 * `decoder.oracle_points`. Integer keys require integral values.
 *
 * # Safety
 * `params` must be a live handle and `key` a NUL-terminated string.
 */
enum AwgnStatus awgn_params_set(struct AwgnParams *params, const char *key, double value);

/**
 * # Safety
 * `params` must be a live handle.
 */
enum AwgnStatus awgn_params_set_scheme(struct AwgnParams *params, enum AwgnScheme scheme);

/**
 * Validates `params` and builds the codes.
 *
 * # Safety
 * `params` must be a live handle and `out` a valid pointer.
 */
enum AwgnStatus awgn_simulator_new(const struct AwgnParams *params, struct AwgnSimulator **out);

/**
 * Releases a simulator; NULL is ignored.
 *
 * # Safety
 * `sim` must come from this library and not be used afterwards.
 */
void awgn_simulator_free(struct AwgnSimulator *sim);

/**
 * Runs every configured trial.
 *
 * # Safety
 * `sim` must be a live handle and `out` a valid pointer.
 */
enum AwgnStatus awgn_simulator_run(const struct AwgnSimulator *sim, struct AwgnRunStats *out);

/**
 * Runs trial `trial` of the configured seed schedule.
 *
 * # Safety
 * `sim` must be a live handle and `out` a valid pointer.
 */
enum AwgnStatus awgn_simulator_run_session(const struct AwgnSimulator *sim,
                                           uint64_t trial,
                                           struct AwgnSession *out);

/**
 * Closed-form exponent table for one parameter point.
 *
 * # Safety
 * `out` must be a valid pointer.
 */
enum AwgnStatus awgn_exponents(double a,
                               double beta,
                               double tau2,
                               double tau3,
                               double sigma2,
                               struct AwgnExponentReport *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* AWGN_FEEDBACK_H */
