#ifndef DEGENWELL_H
#define DEGENWELL_H

/* Generated by cbindgen from src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result code of every fallible call.
 */
typedef enum DwStatus {
  DW_STATUS_OK = 0,
  DW_STATUS_NULL_POINTER = 1,
  DW_STATUS_INVALID_UTF8 = 2,
  /**
   * Bad potential description, parameters or grid.
   */
  DW_STATUS_INVALID_ARGUMENT = 3,
  /**
   * The solver failed: no bracket, truncation, no convergence.
   */
  DW_STATUS_NUMERICAL = 4,
  /**
   * Index or buffer length out of range.
   */
  DW_STATUS_OUT_OF_RANGE = 5,
  DW_STATUS_PANIC = 6,
} DwStatus;

/**
 * A validated potential.
 */
typedef struct DwPotential DwPotential;

/**
 * The lowest eigenvalues of one operator.
 */
typedef struct DwSpectrum DwSpectrum;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version, a static NUL-terminated string.
 */
const char *dw_version(void);

/**
 * Copies the calling thread's last error message into `buf` (NUL
 * terminated, truncated to `cap`) and returns the full message length
 * without the NUL; 0 when there is none.
 *
 * # Safety
 * `buf` must be null or point to `cap` writable bytes.
 */
size_t dw_last_error_message(char *buf, size_t cap);

/**
 * Parses a potential from a JSON object `{"family": ..., "params": {...}}`
 * or a builtin name such as `"exp_flat1"`.
 *
 * # Safety
 * `spec` must be a NUL-terminated string; `out` must be writable.
 */
enum DwStatus dw_potential_from_json(const char *spec, struct DwPotential **out);

/**
 * # Safety
 * `p` must be null or a handle from [`dw_potential_from_json`] not yet freed.
 */
void dw_potential_free(struct DwPotential *p);

/**
 * `V(x)`.
 *
 * # Safety
 * `p` must be a live handle and `out` writable.
 */
enum DwStatus dw_potential_eval(const struct DwPotential *p, double x, double *out);

/**
 * `ln V(x)`, finite far below the smallest positive double.
 *
 * # Safety
 * `p` must be a live handle and `out` writable.
 */
enum DwStatus dw_potential_log_eval(const struct DwPotential *p, double x, double *out);

/**
 * Well edges `delta_minus < 0 < delta_plus` at `h`, and the defect of the
 * defining equations.
 *
 * # Safety
 * `p` must be a live handle; each output must be null or writable.
 */
enum DwStatus dw_well_widths(const struct DwPotential *p,
                             double h,
                             double *delta_minus,
                             double *delta_plus,
                             double *residual);

/**
 * Lowest `k` eigenvalues of `-h^2 d^2/dx^2 + V` on the line. `n_points` is
 * the number of interior points on the default box; 0 picks the default.
 *
 * # Safety
 * `p` must be a live handle and `out` writable.
 */
enum DwStatus dw_eigensolve(const struct DwPotential *p,
                            double h,
                            size_t k,
                            size_t n_points,
                            struct DwSpectrum **out);

/**
 * Lowest `k` eigenvalues of `-h^2 Δ + V0(|x|)` in dimension `dim >= 2`.
 *
 * # Safety
 * `p` must be a live handle and `out` writable.
 */
enum DwStatus dw_radial_eigensolve(const struct DwPotential *p,
                                   double h,
                                   size_t dim,
                                   size_t k,
                                   struct DwSpectrum **out);

/**
 * # Safety
 * `s` must be null or a handle from a solver call not yet freed.
 */
void dw_spectrum_free(struct DwSpectrum *s);

/**
 * Number of eigenvalues held; 0 for a null handle.
 *
 * # Safety
 * `s` must be null or a live handle.
 */
size_t dw_spectrum_len(const struct DwSpectrum *s);

/**
 * Copies the eigenvalues of `-h^2 Δ + V` (or, when `rescaled` is nonzero,
 * of the rescaled operator) into `buf`. `len` receives the count even when
 * `cap` is too small.
 *
 * # Safety
 * `s` must be a live handle, `buf` must hold `cap` doubles, `len` must be
 * null or writable.
 */
enum DwStatus dw_spectrum_eigenvalues(const struct DwSpectrum *s,
                                      int32_t rescaled,
                                      double *buf,
                                      size_t cap,
                                      size_t *len);

/**
 * Error estimates matching [`dw_spectrum_eigenvalues`] with `rescaled = 0`.
 *
 * # Safety
 * As for [`dw_spectrum_eigenvalues`].
 */
enum DwStatus dw_spectrum_errors(const struct DwSpectrum *s, double *buf, size_t cap, size_t *len);

/**
 * The whole spectrum as a JSON document, to be released with
 * [`dw_string_free`].
 *
 * # Safety
 * `s` must be a live handle and `out` writable.
 */
enum DwStatus dw_spectrum_to_json(const struct DwSpectrum *s, char **out);

/**
 * # Safety
 * `s` must be null or a string returned by this library not yet freed.
 */
void dw_string_free(char *s);

/**
 * Lowest `k` Dirichlet eigenvalues of the unit ball in dimension `dim >= 2`,
 * with multiplicity.
 *
 * # Safety
 * `buf` must hold `cap` doubles, `len` must be null or writable.
 */
enum DwStatus dw_ball_reference(size_t dim, size_t k, double *buf, size_t cap, size_t *len);

/**
 * Lowest `k` levels of the unit square well of depth `depth`; missing bound
 * states are reported as `depth`.
 *
 * # Safety
 * `buf` must hold `cap` doubles, `len` must be null or writable.
 */
enum DwStatus dw_square_well_reference(double depth,
                                       size_t k,
                                       double *buf,
                                       size_t cap,
                                       size_t *len);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* DEGENWELL_H */
