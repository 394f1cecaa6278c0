#ifndef MOMENTLAB_H
#define MOMENTLAB_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>

/**
 * Which one-sided quotient to use for the oscillator derivative.
 */
typedef enum MlSide {
  ML_SIDE_CENTRAL = 0,
  ML_SIDE_LEFT = 1,
  ML_SIDE_RIGHT = 2,
} MlSide;

/**
 * Status codes returned by every fallible function.
 */
typedef enum MlStatus {
  ML_STATUS_OK = 0,
  /**
   * A required pointer argument was null.
   */
  ML_STATUS_NULL_POINTER = 1,
  /**
   * A string argument was not valid UTF-8.
   */
  ML_STATUS_INVALID_UTF8 = 2,
  /**
   * Invalid parameters or potential description.
   */
  ML_STATUS_CONFIG = 3,
  /**
   * Parameters outside the domain of the requested quantity.
   */
  ML_STATUS_DOMAIN = 4,
  /**
   * A numerical method failed to reach its tolerance.
   */
  ML_STATUS_NUMERICAL = 5,
  /**
   * The caller's buffer is too small; the required length was written.
   */
  ML_STATUS_BUFFER_TOO_SMALL = 6,
  /**
   * An internal panic was caught at the boundary.
   */
  ML_STATUS_PANIC = 7,
} MlStatus;

/**
 * A potential `V` on `R^d`.
 */
typedef struct MlPotential MlPotential;

/**
 * Eigenvalues of one discretized operator.
 */
typedef struct MlSpectrum MlSpectrum;

/**
 * Lieb-Thirring comparison at one coupling.
 */
typedef struct MlLtResult {
  double scaled_moment;
  double classical_bound;
  double ratio;
  size_t bound_states;
  bool boundary_limited;
} MlLtResult;

/**
 * Golden-Thompson comparison at one coupling and time.
 */
typedef struct MlGoldenThompson {
  double trace;
  double tail_bound;
  double bound;
  double ratio;
} MlGoldenThompson;

/**
 * Derivative of the exact oscillator moment; `sign` is -1, 0 or 1.
 */
typedef struct MlDerivative {
  double value;
  double error_estimate;
  int32_t sign;
} MlDerivative;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static NUL-terminated string.
 */
const char *ml_version(void);

/**
 * Copies the calling thread's last error message into `buffer`.
 *
 * Writes the message length (excluding the NUL) to `length` when it is not
 * null. Returns `BufferTooSmall` when `capacity` cannot hold the message and
 * its terminator; an empty string is written when there is no error.
 *
 * # Safety
 * `buffer` must be valid for `capacity` bytes; `length` may be null.
 */
enum MlStatus ml_last_error_message(char *buffer, size_t capacity, size_t *length);

/**
 * Parses a potential such as `"sech2:g=6"` in `dimension` dimensions.
 *
 * # Safety
 * `text` must be a NUL-terminated string; `out` must be writable.
 */
enum MlStatus ml_potential_parse(const char *text, size_t dimension, struct MlPotential **out);

/**
 * Releases a potential; null is ignored.
 *
 * # Safety
 * `p` must come from [`ml_potential_parse`] and not be freed twice.
 */
void ml_potential_free(struct MlPotential *p);

/**
 * Dimension `d` of the potential.
 *
 * # Safety
 * `p` must be a live handle and `out` writable.
 */
enum MlStatus ml_potential_dimension(const struct MlPotential *p, size_t *out);

/**
 * Evaluates `V` at one point `x` of length `d`.
 *
 * # Safety
 * `x` must hold `dimension` values and `out` be writable.
 */
enum MlStatus ml_potential_evaluate(const struct MlPotential *p,
                                    const double *x,
                                    size_t dimension,
                                    double *out);

/**
 * `1` for wells (`V <= 0`, `V -> 0`), `2` for confining potentials, `0`
 * otherwise.
 *
 * # Safety
 * `p` must be a live handle and `out` writable.
 */
enum MlStatus ml_potential_kind(const struct MlPotential *p, int32_t *out);

/**
 * Classical constant `L^cl_{σ,d}`.
 *
 * # Safety
 * `out` must be writable.
 */
enum MlStatus ml_classical_constant(double sigma, size_t dimension, double *out);

/**
 * Eigenvalues below `cutoff` of `-αΔ + V` on `[-L, L]` with `points`
 * interior points per axis (0 selects the standard box).
 *
 * # Safety
 * `p` must be a live handle and `out` writable.
 */
enum MlStatus ml_spectrum_compute(const struct MlPotential *p,
                                  double alpha,
                                  double cutoff,
                                  double half_width,
                                  size_t points,
                                  struct MlSpectrum **out);

/**
 * Releases a spectrum; null is ignored.
 *
 * # Safety
 * `s` must come from [`ml_spectrum_compute`] and not be freed twice.
 */
void ml_spectrum_free(struct MlSpectrum *s);

/**
 * Number of eigenvalues held.
 *
 * # Safety
 * `s` must be a live handle and `out` writable.
 */
enum MlStatus ml_spectrum_len(const struct MlSpectrum *s, size_t *out);

/**
 * Copies the ascending eigenvalues into `buffer`. `length` receives the
 * count; `BufferTooSmall` is returned when `capacity` is insufficient.
 *
 * # Safety
 * `buffer` must be valid for `capacity` doubles; `length` writable.
 */
enum MlStatus ml_spectrum_eigenvalues(const struct MlSpectrum *s,
                                      double *buffer,
                                      size_t capacity,
                                      size_t *length);

/**
 * Whether the shallowest state reaches the box walls.
 *
 * # Safety
 * `s` must be a live handle and `out` writable.
 */
enum MlStatus ml_spectrum_boundary_limited(const struct MlSpectrum *s, bool *out);

/**
 * Riesz mean `Σ (z - E_j)₊^σ` of the held eigenvalues.
 *
 * # Safety
 * `s` must be a live handle and `out` writable.
 */
enum MlStatus ml_riesz_mean(const struct MlSpectrum *s, double sigma, double z, double *out);

/**
 * Scaled moment against the classical bound for `σ >= 2`.
 *
 * # Safety
 * `p` must be a live handle and `out` writable.
 */
enum MlStatus ml_lt_check(const struct MlPotential *p,
                          double sigma,
                          double alpha,
                          double half_width,
                          size_t points,
                          struct MlLtResult *out);

/**
 * Heat trace against the Golden-Thompson bound for a confining potential.
 *
 * # Safety
 * `p` must be a live handle and `out` writable.
 */
enum MlStatus ml_golden_thompson(const struct MlPotential *p,
                                 double alpha,
                                 double t,
                                 double half_width,
                                 size_t points,
                                 struct MlGoldenThompson *out);

/**
 * Derivative in `α` of the exact oscillator moment `α^{d/2} Σ (1-E)₊^σ`.
 * `step` is the initial Richardson step; pass 0 for `1e-3 α`.
 *
 * # Safety
 * `out` must be writable.
 */
enum MlStatus ml_oscillator_derivative(size_t dimension,
                                       double sigma,
                                       double alpha,
                                       double step,
                                       enum MlSide side,
                                       struct MlDerivative *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* MOMENTLAB_H */
