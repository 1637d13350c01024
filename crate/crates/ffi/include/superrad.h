#ifndef SUPERRAD_H
#define SUPERRAD_H

#include <stddef.h>
#include <stdint.h>

typedef enum SrStatus {
  SR_STATUS_OK = 0,
  SR_STATUS_NULL_POINTER = 1,
  SR_STATUS_INVALID_ARGUMENT = 2,
  SR_STATUS_PARSE_ERROR = 3,
  SR_STATUS_VALIDATION_ERROR = 4,
  SR_STATUS_INSTABILITY = 5,
  SR_STATUS_IO_ERROR = 6,
  SR_STATUS_OUT_OF_RANGE = 7,
  SR_STATUS_PANIC = 8,
} SrStatus;

/**
 * Opaque simulation configuration.
 */
typedef struct SrConfig SrConfig;

/**
 * Opaque finished run.
 */
typedef struct SrRun SrRun;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static NUL-terminated string.
 */
const char *sr_version(void);

/**
 * Message of the last failed call on this thread (empty after a success).
 * The pointer stays valid until the next call into the library on the same thread.
 */
const char *sr_last_error_message(void);

/**
 * `order · 4ω_r` in rad/s.
 *
 * # Safety
 * `out` must point to writable memory for one `double`.
 */
enum SrStatus sr_resonance_frequency(int64_t order, double recoil_frequency, double *out);

struct SrConfig *sr_config_default(void);

/**
 * Parse a TOML document.
 *
 * # Safety
 * `text` must be a NUL-terminated string; `out` must be writable.
 */
enum SrStatus sr_config_parse(const char *text, struct SrConfig **out);

/**
 * Configuration of a built-in scenario.
 *
 * # Safety
 * `name` must be a NUL-terminated string; `out` must be writable.
 */
enum SrStatus sr_config_builtin(const char *name, struct SrConfig **out);

/**
 * # Safety
 * `cfg` must come from this library and not be used afterwards.
 */
void sr_config_free(struct SrConfig *cfg);

/**
 * # Safety
 * `cfg` must be a live handle.
 */
enum SrStatus sr_config_set_delta_omega_khz(struct SrConfig *cfg, double khz);

/**
 * # Safety
 * `cfg` must be a live handle.
 */
enum SrStatus sr_config_set_coupling_g(struct SrConfig *cfg, double g_per_s);

/**
 * # Safety
 * `cfg` must be a live handle.
 */
enum SrStatus sr_config_set_phi0(struct SrConfig *cfg, double phi0_rad);

/**
 * # Safety
 * `cfg` must be a live handle.
 */
enum SrStatus sr_config_set_pulse_duration_us(struct SrConfig *cfg, double us);

/**
 * Set resolution; checked together with the rest of the config by `sr_config_validate`.
 *
 * # Safety
 * `cfg` must be a live handle.
 */
enum SrStatus sr_config_set_grid(struct SrConfig *cfg,
                                 uintptr_t num_points,
                                 double dt,
                                 uintptr_t sample_every);

/**
 * # Safety
 * `cfg` must be a live handle.
 */
enum SrStatus sr_config_validate(const struct SrConfig *cfg);

/**
 * Run the simulation described by `cfg`.
 *
 * # Safety
 * `cfg` must be a live handle; `out` must be writable.
 */
enum SrStatus sr_simulate(const struct SrConfig *cfg, struct SrRun **out);

/**
 * # Safety
 * `run` must come from this library and not be used afterwards.
 */
void sr_run_free(struct SrRun *run);

/**
 * Number of captures (0 for a null handle).
 *
 * # Safety
 * `run` must be null or a live handle.
 */
uintptr_t sr_run_capture_count(const struct SrRun *run);

/**
 * Number of lattice modes (0 for a null handle).
 *
 * # Safety
 * `run` must be null or a live handle.
 */
uintptr_t sr_run_mode_count(const struct SrRun *run);

/**
 * Label `(n, m)` of mode `index` in lattice order.
 *
 * # Safety
 * `run` must be a live handle; `n` and `m` must be writable.
 */
enum SrStatus sr_run_mode(const struct SrRun *run, uintptr_t index, int32_t *n, int32_t *m);

/**
 * Dimensionless time and time in microseconds of capture `k`.
 *
 * # Safety
 * `run` must be a live handle; `tau` and `t_us` must be writable.
 */
enum SrStatus sr_run_time(const struct SrRun *run, uintptr_t k, double *tau, double *t_us);

/**
 * Copy the populations of capture `k` (lattice order) into `buf`, which must
 * hold at least `sr_run_mode_count` values.
 *
 * # Safety
 * `run` must be a live handle; `buf` must be writable for `len` doubles.
 */
enum SrStatus sr_run_populations(const struct SrRun *run, uintptr_t k, double *buf, uintptr_t len);

/**
 * Probed `|e₊|`, `|e₋|` and the diagonal components `|e₊^(0,0)|`,
 * `|e₊^(1,1)|`, `|e₊^(2,2)|` at capture `k`; `diagonal` receives 3 values
 * (zero for components outside the lattice).
 *
 * # Safety
 * `run` must be a live handle; the outputs must be writable.
 */
enum SrStatus sr_run_endfire(const struct SrRun *run,
                             uintptr_t k,
                             double *e_plus,
                             double *e_minus,
                             double *diagonal);

/**
 * Largest relative deviation of the total atom number over the run.
 *
 * # Safety
 * `run` must be a live handle; `out` must be writable.
 */
enum SrStatus sr_run_number_drift(const struct SrRun *run, double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SUPERRAD_H */
