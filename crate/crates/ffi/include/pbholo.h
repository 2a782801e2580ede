/* C interface to the pbholo nanobeam hologram toolkit. */

#ifndef PBHOLO_H
#define PBHOLO_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

#define PBHOLO_OK 0

#define PBHOLO_ERR_INPUT 2

#define PBHOLO_ERR_NUMERICAL 3

// Probe polarization for the grating solver.
typedef enum PbPolarization {
  // Electric field along the beams.
  PB_POLARIZATION_TE = 0,
  // Electric field across the beams.
  PB_POLARIZATION_TM = 1,
} PbPolarization;

// Opaque run configuration handle.
typedef struct PbConfig PbConfig;

// Opaque phase-map handle.
typedef struct PbPhaseMap PbPhaseMap;

// One lamellar nanobeam grating evaluation point. Lengths in meters; the
// beam index is given as n - i k with k >= 0 (absorbing).
typedef struct PbGratingParams {
  double wavelength_m;
  double period_m;
  double width_m;
  double thickness_m;
  double beam_n;
  double beam_k;
  double n_surround;
  double n_substrate;
  double n_cover;
  // Fourier orders kept per side (the solver uses 2*harmonics + 1).
  uint32_t harmonics;
} PbGratingParams;

// Zeroth-order response of the grating for one polarization.
typedef struct PbGratingResponse {
  double t0_re;
  double t0_im;
  // Summed power of all propagating transmitted orders.
  double transmitted;
  // Summed power of all propagating reflected orders.
  double reflected;
} PbGratingResponse;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Library version as a static string; do not free.
const char *pbholo_version(void);

// Copy the current thread's last error message into `buf`. Returns the
// message length in bytes (excluding the NUL terminator), 0 when no error
// has been recorded since the last successful call that clears it.
//
// # Safety
// `buf` must point to `cap` writable bytes, or be NULL to query the length.
size_t pbholo_last_error(char *buf, size_t cap);

// New configuration with every field at its default.
struct PbConfig *pbholo_config_default(void);

// Parse a full `key = value` configuration text. Returns NULL on error.
//
// # Safety
// `text` must be a valid NUL-terminated string.
struct PbConfig *pbholo_config_parse(const char *text);

// Apply one `key = value` assignment; the config is unchanged on failure.
//
// # Safety
// `cfg` must be a live handle; `key` and `value` valid strings.
int32_t pbholo_config_set(struct PbConfig *cfg, const char *key, const char *value);

// Copy the resolved (sorted, fully explicit) configuration text into `buf`;
// returns the full length in bytes excluding the NUL terminator.
//
// # Safety
// `cfg` must be a live handle; `buf` NULL or `cap` writable bytes.
size_t pbholo_config_resolved(const struct PbConfig *cfg, char *buf, size_t cap);

// # Safety
// `cfg` must come from this library and not be freed twice.
void pbholo_config_free(struct PbConfig *cfg);

// Design a hologram for `pattern_path` and write the run artifacts
// (config echo, phase map) into `out_dir`. Mirrors `pbholo design`.
//
// # Safety
// `cfg` must be a live handle; the paths valid strings.
int32_t pbholo_run_design(const struct PbConfig *cfg,
                          const char *pattern_path,
                          const char *out_dir);

// Simulate the retina or conjugate image of a designed phase map under the
// display mask at `mask_path`. Mirrors `pbholo simulate`.
//
// # Safety
// `cfg` must be a live handle; the paths valid strings.
int32_t pbholo_run_simulate(const struct PbConfig *cfg,
                            const char *phase_path,
                            const char *mask_path,
                            const char *out_dir);

// Sweep the nanobeam grating design space and write sweep.csv plus the
// best operating point. Mirrors `pbholo grating`.
//
// # Safety
// `cfg` must be a live handle; `out_dir` a valid string.
int32_t pbholo_run_grating(const struct PbConfig *cfg, const char *out_dir);

// Export a quantized phase map as a nanobeam layout (JSON, CSV, SVG).
// Mirrors `pbholo layout`.
//
// # Safety
// `cfg` must be a live handle; the paths valid strings.
int32_t pbholo_run_layout(const struct PbConfig *cfg, const char *phase_path, const char *out_dir);

// Load a 16-bit phase PGM (with its sidecar) written by this toolkit.
// Returns NULL on error.
//
// # Safety
// `path` must be a valid NUL-terminated string.
struct PbPhaseMap *pbholo_phase_map_load(const char *path);

// Samples per side of a square phase map (0 for a NULL handle).
//
// # Safety
// `map` must be NULL or a live handle.
size_t pbholo_phase_map_side(const struct PbPhaseMap *map);

// Sample pitch in meters (NaN for a NULL handle).
//
// # Safety
// `map` must be NULL or a live handle.
double pbholo_phase_map_pitch(const struct PbPhaseMap *map);

// Design wavelength in meters (NaN for a NULL handle).
//
// # Safety
// `map` must be NULL or a live handle.
double pbholo_phase_map_wavelength(const struct PbPhaseMap *map);

// Quantization level count baked into the map (0 means continuous).
//
// # Safety
// `map` must be NULL or a live handle.
uint32_t pbholo_phase_map_levels(const struct PbPhaseMap *map);

// Copy the wrapped phase samples (row-major, radians in [-pi, pi)) into
// `buf`, which must hold side*side doubles.
//
// # Safety
// `map` must be a live handle; `buf` must point to `cap` writable doubles.
int32_t pbholo_phase_map_values(const struct PbPhaseMap *map, double *buf, size_t cap);

// # Safety
// `map` must come from this library and not be freed twice.
void pbholo_phase_map_free(struct PbPhaseMap *map);

// Wrap a phase into [-pi, pi). Non-finite input yields NaN.
double pbholo_wrap_phase(double phi);

// Snap a phase to the nearest of `levels` centers spanning [-pi, pi).
//
// # Safety
// `out` must point to a writable double.
int32_t pbholo_quantize_phase(double phi, uint32_t levels, double *out);

// Solve the rigorous coupled-wave problem at one design point.
//
// # Safety
// `params` and `out` must point to valid structs.
int32_t pbholo_grating_solve(const struct PbGratingParams *params,
                             enum PbPolarization pol,
                             struct PbGratingResponse *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* PBHOLO_H */
