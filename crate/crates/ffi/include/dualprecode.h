#ifndef DUALPRECODE_H
#define DUALPRECODE_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result code of every fallible call.
 */
typedef enum DpStatus {
  DP_STATUS_OK = 0,
  DP_STATUS_NULL_POINTER = 1,
  DP_STATUS_INVALID_ARGUMENT = 2,
  /**
   * Bad configuration text, preset name or parameter combination.
   */
  DP_STATUS_CONFIG = 3,
  /**
   * Solver or factorization failure.
   */
  DP_STATUS_NUMERICAL = 4,
  DP_STATUS_IO = 5,
  /**
   * A Rust panic was caught at the boundary.
   */
  DP_STATUS_PANIC = 6,
} DpStatus;

typedef enum DpScheme {
  DP_SCHEME_BD = 0,
  DP_SCHEME_BDS = 1,
  DP_SCHEME_SWITCH = 2,
  DP_SCHEME_SWITCH_RAW = 3,
  DP_SCHEME_ASYM_BD = 4,
  DP_SCHEME_ASYM_BDS = 5,
  DP_SCHEME_APPROX_BD = 6,
  DP_SCHEME_APPROX_BDS = 7,
} DpScheme;

/**
 * Parsed experiment (a config file or preset plus overrides).
 */
typedef struct DpExperiment DpExperiment;

/**
 * Rows produced by [`dp_experiment_run`].
 */
typedef struct DpResults DpResults;

/**
 * One output row. Random axes are reported as [lo, hi]; fixed values have
 * lo == hi. Missing values are NaN (std_error of asymptotic rows) or −1
 * (n_bits outside bit-budget sweeps).
 */
typedef struct DpRow {
  enum DpScheme scheme;
  double snr_db;
  double chi_lo;
  double chi_hi;
  double tau_sq_lo;
  double tau_sq_hi;
  int64_t n_bits;
  double sum_rate;
  double std_error;
  size_t n_trials;
  uint64_t seed;
  bool tau_clamped;
} DpRow;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static NUL-terminated string.
 */
const char *dp_version(void);

/**
 * Copies the calling thread's last error message into `buf` (truncated and
 * always NUL-terminated when `len > 0`). Returns the full message length
 * plus one, so a caller can size the buffer; 1 means no error.
 *
 * # Safety
 * `buf` must be NULL or point to `len` writable bytes.
 */
size_t dp_last_error_message(char *buf, size_t len);

/**
 * Creates an experiment from a built-in preset name ("fig4", ...).
 *
 * # Safety
 * `name` must be a NUL-terminated string; `out` must be writable.
 */
enum DpStatus dp_experiment_from_preset(const char *name, struct DpExperiment **out);

/**
 * Creates an experiment from config text (`key = value` lines).
 *
 * # Safety
 * `text` must be a NUL-terminated string; `out` must be writable.
 */
enum DpStatus dp_experiment_from_config(const char *text, struct DpExperiment **out);

/**
 * # Safety
 * `exp` must be a live handle from one of the constructors.
 */
enum DpStatus dp_experiment_set_trials(struct DpExperiment *exp, size_t n_trials);

/**
 * # Safety
 * `exp` must be a live handle from one of the constructors.
 */
enum DpStatus dp_experiment_set_seed(struct DpExperiment *exp, uint64_t seed);

/**
 * # Safety
 * `exp` must be NULL or a live handle; it is invalid afterwards.
 */
void dp_experiment_free(struct DpExperiment *exp);

/**
 * Runs the whole sweep and returns its rows.
 *
 * # Safety
 * `exp` must be a live handle; `out` must be writable.
 */
enum DpStatus dp_experiment_run(const struct DpExperiment *exp, struct DpResults **out);

/**
 * Runs the sweep, appending CSV rows to `path` (the header is written if
 * the file is new; an existing file must carry the same header).
 *
 * # Safety
 * `exp` must be a live handle; `path` a NUL-terminated string.
 */
enum DpStatus dp_experiment_run_csv(const struct DpExperiment *exp, const char *path);

/**
 * Number of rows; 0 for NULL.
 *
 * # Safety
 * `res` must be NULL or a live handle.
 */
size_t dp_results_len(const struct DpResults *res);

/**
 * # Safety
 * `res` must be a live handle; `out` must be writable.
 */
enum DpStatus dp_results_get(const struct DpResults *res, size_t index, struct DpRow *out);

/**
 * Copies the row's scenario label into `buf`; returns its length plus one
 * (0 if the handle or index is invalid).
 *
 * # Safety
 * `res` must be NULL or a live handle; `buf` NULL or `len` writable bytes.
 */
size_t dp_results_scenario_id(const struct DpResults *res, size_t index, char *buf, size_t len);

/**
 * # Safety
 * `res` must be NULL or a live handle; it is invalid afterwards.
 */
void dp_results_free(struct DpResults *res);

/**
 * Quantization distortion τ² for `n_bits` per user with `r` dominant
 * eigenvectors per polarization. `scheme` selects BD or BDS.
 *
 * # Safety
 * `out` must be writable.
 */
enum DpStatus dp_tau_from_bits(uint32_t n_bits, size_t r, enum DpScheme scheme, double *out);

/**
 * Effective gain and inverse XPD under a uniform orientation mismatch.
 *
 * # Safety
 * `c_eff` and `chi_eff` must be writable.
 */
enum DpStatus dp_mismatch_stats(double chi, double theta_max, double *c_eff, double *chi_eff);

/**
 * Large-system sum rate of a clustered cell (groups spaced π/6 apart from
 * −π/4, half-wavelength dual-polarized array, default B̄ and r). The CSIT
 * error τ² applies to the chosen structure as given.
 *
 * # Safety
 * `out` must be writable.
 */
enum DpStatus dp_asymptotic_sum_rate(size_t antennas,
                                     size_t groups,
                                     size_t users_per_group,
                                     double spread,
                                     double snr_db,
                                     double chi,
                                     double tau_sq,
                                     enum DpScheme scheme,
                                     double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* DUALPRECODE_H */
