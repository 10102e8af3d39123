#ifndef PACT_H
#define PACT_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Interpolation of sensor spectra at ω = c|k|.
typedef enum PactInterpolation {
  PACT_INTERPOLATION_NEAREST = 0,
  PACT_INTERPOLATION_LINEAR = 1,
} PactInterpolation;

// Result of every `pact_*` call that can fail.
typedef enum PactStatus {
  PACT_STATUS_OK = 0,
  // A required pointer argument was NULL.
  PACT_STATUS_NULL_POINTER = 1,
  // An argument was out of range or not valid UTF-8.
  PACT_STATUS_INVALID_ARGUMENT = 2,
  // The input file does not exist.
  PACT_STATUS_NOT_FOUND = 3,
  // Any other I/O failure.
  PACT_STATUS_IO = 4,
  // The file is not a valid container of the expected kind.
  PACT_STATUS_FORMAT = 5,
  // Inputs violate a documented invariant.
  PACT_STATUS_VALIDATION = 6,
  // An internal error; the library state is unaffected.
  PACT_STATUS_PANIC = 7,
} PactStatus;

// Image or absorbed-energy field on a regular 2D or 3D grid.
typedef struct PactObjectField PactObjectField;

// Sampled pressure traces with their sensor geometry and time axis.
typedef struct PactPressureSeries PactPressureSeries;

// Reconstruction settings; start from [`pact_recon_options_default`].
typedef struct PactReconOptions {
  // Image side in samples (the image is square or cubic).
  size_t grid_size;
  // Image spacing (mm).
  double spacing;
  // k-grid oversampling relative to the image grid.
  size_t oversample;
  // Temporal zero-padding factor.
  size_t pad;
  enum PactInterpolation interpolation;
  // Speed of sound (mm/μs).
  double c;
  // Ratio β/Cp.
  double beta_over_cp;
} PactReconOptions;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Library version as a static NUL-terminated string.
const char *pact_version(void);

// Copies the calling thread's last error message into `buf` (truncated and
// always NUL-terminated when `len > 0`) and returns the full message length
// excluding the terminator, or 0 if the last call succeeded.
//
// # Safety
// `buf` must be NULL or point to at least `len` writable bytes.
size_t pact_last_error_message(char *buf, size_t len);

// Defaults: 256 samples at 0.1 mm, oversample 2, pad 8, nearest
// interpolation, c = 1.5 mm/μs, β/Cp = 1000.
//
// # Safety
// `out` must be NULL or point to a writable `PactReconOptions`.
enum PactStatus pact_recon_options_default(struct PactReconOptions *out);

// Creates a field centered on the origin from row-major `values` (last axis
// fastest). `shape` holds `ndim` entries; `ndim` is 2 or 3.
//
// # Safety
// `shape` must point to `ndim` values, `values` to the product of the shape,
// and `out` to a writable handle pointer.
enum PactStatus pact_object_new(size_t ndim,
                                const size_t *shape,
                                double spacing,
                                const double *values,
                                struct PactObjectField **out);

// Reads an object container.
//
// # Safety
// `path` must be a NUL-terminated string and `out` a writable handle pointer.
enum PactStatus pact_object_read(const char *path, struct PactObjectField **out);

// Writes an object container.
//
// # Safety
// `object` must be a live handle and `path` a NUL-terminated string.
enum PactStatus pact_object_write(const struct PactObjectField *object, const char *path);

// Number of axes (2 or 3), or 0 for a NULL handle.
//
// # Safety
// `object` must be NULL or a live handle.
size_t pact_object_ndim(const struct PactObjectField *object);

// Total number of samples, or 0 for a NULL handle.
//
// # Safety
// `object` must be NULL or a live handle.
size_t pact_object_len(const struct PactObjectField *object);

// Copies shape, spacing (mm) and origin (mm) into arrays of `ndim` entries;
// any of them may be NULL.
//
// # Safety
// `object` must be a live handle; non-NULL outputs must hold `ndim` values.
enum PactStatus pact_object_grid(const struct PactObjectField *object,
                                 size_t *shape,
                                 double *spacing,
                                 double *origin);

// Row-major samples, valid until the handle is freed; NULL for a NULL handle.
//
// # Safety
// `object` must be NULL or a live handle.
const double *pact_object_data(const struct PactObjectField *object);

// Releases an object handle; NULL is ignored.
//
// # Safety
// `object` must be NULL or a handle not yet freed.
void pact_object_free(struct PactObjectField *object);

// Creates pressure data from `num_sensors` positions (`ndim` coordinates
// each, row-major) on a circle or sphere of `radius`, quadrature `weights`
// (NULL for uniform weights), and `num_sensors × nt` samples, sensor-major.
//
// # Safety
// Pointers must reference arrays of the sizes above and `out` a writable
// handle pointer.
enum PactStatus pact_pressure_new(size_t ndim,
                                  size_t num_sensors,
                                  const double *positions,
                                  const double *weights,
                                  double radius,
                                  double dt,
                                  size_t nt,
                                  const double *samples,
                                  struct PactPressureSeries **out);

// Simulates pressure from an object with the k-space forward model on
// `num_sensors` sensors spread uniformly over a circle (2D objects) or a
// Fibonacci sphere (3D objects) of `radius`.
//
// # Safety
// `object` must be a live handle and `out` a writable handle pointer.
enum PactStatus pact_simulate(const struct PactObjectField *object,
                              size_t num_sensors,
                              double radius,
                              double dt,
                              size_t nt,
                              double c,
                              double beta_over_cp,
                              struct PactPressureSeries **out);

// Reads a pressure container.
//
// # Safety
// `path` must be a NUL-terminated string and `out` a writable handle pointer.
enum PactStatus pact_pressure_read(const char *path, struct PactPressureSeries **out);

// Writes a pressure container.
//
// # Safety
// `data` must be a live handle and `path` a NUL-terminated string.
enum PactStatus pact_pressure_write(const struct PactPressureSeries *data, const char *path);

// Number of sensors, or 0 for a NULL handle.
//
// # Safety
// `data` must be NULL or a live handle.
size_t pact_pressure_num_sensors(const struct PactPressureSeries *data);

// Samples per trace, or 0 for a NULL handle.
//
// # Safety
// `data` must be NULL or a live handle.
size_t pact_pressure_nt(const struct PactPressureSeries *data);

// Sampling interval (μs), or 0 for a NULL handle.
//
// # Safety
// `data` must be NULL or a live handle.
double pact_pressure_dt(const struct PactPressureSeries *data);

// Sensor-major samples (`num_sensors × nt`), valid until the handle is
// freed; NULL for a NULL handle.
//
// # Safety
// `data` must be NULL or a live handle.
const double *pact_pressure_data(const struct PactPressureSeries *data);

// Releases a pressure handle; NULL is ignored.
//
// # Safety
// `data` must be NULL or a handle not yet freed.
void pact_pressure_free(struct PactPressureSeries *data);

// Fourier-domain reconstruction onto a grid centered on the origin.
//
// # Safety
// `data` must be a live handle, `options` NULL (defaults) or a valid
// pointer whose `interpolation` is a declared enumerator, and `out` a
// writable handle pointer.
enum PactStatus pact_reconstruct(const struct PactPressureSeries *data,
                                 const struct PactReconOptions *options,
                                 struct PactObjectField **out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* PACT_H */
