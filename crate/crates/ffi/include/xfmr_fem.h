#ifndef XFMR_FEM_H
#define XFMR_FEM_H

/* Generated by cbindgen from src/lib.rs; do not edit. */

#include <stddef.h>
#include <stdint.h>

/**
 * Outcome of a call.
 */
typedef enum XfStatus {
  XF_STATUS_OK = 0,
  /**
   * A required pointer argument was null.
   */
  XF_STATUS_NULL_POINTER = 1,
  /**
   * A string argument was not valid UTF-8.
   */
  XF_STATUS_INVALID_UTF8 = 2,
  /**
   * Out-of-range number, unknown name or malformed input text.
   */
  XF_STATUS_INVALID_ARGUMENT = 3,
  /**
   * The geometry is inconsistent or the windings do not fit.
   */
  XF_STATUS_GEOMETRY = 4,
  /**
   * Mesh generation failed.
   */
  XF_STATUS_MESH = 5,
  /**
   * The linear or nonlinear solve failed.
   */
  XF_STATUS_SOLVER = 6,
  /**
   * Reading or writing a file failed.
   */
  XF_STATUS_IO = 7,
  /**
   * A material record is invalid or missing.
   */
  XF_STATUS_MATERIAL = 8,
  /**
   * The library panicked; the handle arguments should be considered unusable.
   */
  XF_STATUS_PANIC = 9,
} XfStatus;

typedef enum XfRole {
  XF_ROLE_PRIMARY = 0,
  XF_ROLE_SECONDARY = 1,
} XfRole;

/**
 * How the core enters the capacitance solve.
 */
typedef enum XfCoreModel {
  XF_CORE_MODEL_FLOATING = 0,
  XF_CORE_MODEL_DIELECTRIC = 1,
  XF_CORE_MODEL_GROUNDED = 2,
} XfCoreModel;

/**
 * Material catalog.
 */
typedef struct XfCatalog XfCatalog;

/**
 * Transformer scenario: core, windings, arrangement and rating.
 */
typedef struct XfScenario XfScenario;

/**
 * A meshed scenario with its materials, ready for extraction.
 */
typedef struct XfStudy XfStudy;

/**
 * Leakage study summary.
 */
typedef struct XfLeakageResult {
  /**
   * H, primary-referred.
   */
  double leakage_inductance;
  /**
   * A/m over the winding window.
   */
  double peak_h;
  /**
   * Primary current used (A).
   */
  double current;
} XfLeakageResult;

/**
 * Dielectric check summary.
 */
typedef struct XfDielectricResult {
  /**
   * V/m over all insulating materials.
   */
  double peak_e;
  /**
   * Smallest strength/peak ratio.
   */
  double min_margin;
  /**
   * 1 when every margin exceeds 1.
   */
  int passes;
} XfDielectricResult;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static NUL-terminated string.
 */
const char *xf_version(void);

/**
 * Message of the last failed call on this thread; empty after a successful call. The pointer
 * stays valid until the next call into the library on the same thread.
 */
const char *xf_last_error_message(void);

/**
 * Copies the last error message into `buf` (always NUL-terminated when `len > 0`) and
 * returns the buffer size the full message needs, terminator included.
 *
 * # Safety
 * `buf` must be null or point to `len` writable bytes.
 */
size_t xf_last_error_copy(char *buf, size_t len);

/**
 * Number of built-in presets.
 */
size_t xf_preset_count(void);

/**
 * Static NUL-terminated id of preset `index`, or null when out of range.
 */
const char *xf_preset_id(size_t index);

/**
 * Built-in materials (air, varnish, bobbin plastic, copper, iron powder, ferrite).
 *
 * # Safety
 * `out` must be a valid pointer to write the handle to.
 */
enum XfStatus xf_catalog_builtin(struct XfCatalog **out);

/**
 * Built-in materials with the records of a TOML catalog merged over them.
 *
 * # Safety
 * `toml` must be a NUL-terminated string; `out` a valid pointer.
 */
enum XfStatus xf_catalog_from_toml(const char *toml, struct XfCatalog **out);

/**
 * # Safety
 * `catalog` must be null or a handle from this library not yet freed.
 */
void xf_catalog_free(struct XfCatalog *catalog);

/**
 * Builds a preset scenario by id.
 *
 * # Safety
 * `id` must be a NUL-terminated string; `out` a valid pointer.
 */
enum XfStatus xf_scenario_preset(const char *id, struct XfScenario **out);

/**
 * Builds a preset with its layer order replaced, e.g. `"PSPSPSPS"`.
 *
 * # Safety
 * `id` and `arrangement` must be NUL-terminated strings; `out` a valid pointer.
 */
enum XfStatus xf_scenario_preset_arranged(const char *id,
                                          const char *arrangement,
                                          struct XfScenario **out);

/**
 * Parses a scenario document.
 *
 * # Safety
 * `toml` must be a NUL-terminated string; `out` a valid pointer.
 */
enum XfStatus xf_scenario_from_toml(const char *toml, struct XfScenario **out);

/**
 * Turn count of one winding.
 *
 * # Safety
 * `scenario` must be a live handle; `out` a valid pointer.
 */
enum XfStatus xf_scenario_turns(const struct XfScenario *scenario,
                                enum XfRole which,
                                uint32_t *out);

/**
 * Rated primary current, power over voltage (A).
 *
 * # Safety
 * `scenario` must be a live handle; `out` a valid pointer.
 */
enum XfStatus xf_scenario_rated_current(const struct XfScenario *scenario, double *out);

/**
 * Dowell AC resistance referred to the primary at `frequency` Hz (Ω).
 *
 * # Safety
 * `scenario` must be a live handle; `out` a valid pointer.
 */
enum XfStatus xf_scenario_ac_resistance(const struct XfScenario *scenario,
                                        double frequency,
                                        double *out);

/**
 * # Safety
 * `scenario` must be null or a handle from this library not yet freed.
 */
void xf_scenario_free(struct XfScenario *scenario);

/**
 * Lays out and meshes `scenario` with target size `h` (m), size growth `grading` (≥ 1) and
 * `refinements` uniform refinements. The study keeps its own copies of both inputs.
 *
 * # Safety
 * `scenario` and `catalog` must be live handles; `out` a valid pointer.
 */
enum XfStatus xf_study_new(const struct XfScenario *scenario,
                           const struct XfCatalog *catalog,
                           double h,
                           double grading,
                           uint32_t refinements,
                           struct XfStudy **out);

/**
 * A new study on the uniformly refined mesh.
 *
 * # Safety
 * `study` must be a live handle; `out` a valid pointer.
 */
enum XfStatus xf_study_refined(const struct XfStudy *study, struct XfStudy **out);

/**
 * Node and element counts of the study mesh.
 *
 * # Safety
 * `study` must be a live handle; `nodes` and `elements` valid pointers.
 */
enum XfStatus xf_study_mesh_size(const struct XfStudy *study, size_t *nodes, size_t *elements);

/**
 * Writes the study mesh as legacy VTK with region codes.
 *
 * # Safety
 * `study` must be a live handle; `path` a NUL-terminated string.
 */
enum XfStatus xf_study_export_mesh(const struct XfStudy *study, const char *path);

/**
 * Primary at rated current, secondary open: L = 2E/I² (H).
 *
 * # Safety
 * `study` must be a live handle; `out` a valid pointer.
 */
enum XfStatus xf_magnetizing_inductance(const struct XfStudy *study, double *out);

/**
 * Short-circuit leakage at rated current. `skin_frequency` > 0 confines turn currents to one
 * skin depth at that frequency (Hz); 0 spreads them uniformly.
 *
 * # Safety
 * `study` must be a live handle; `out` a valid pointer.
 */
enum XfStatus xf_leakage_inductance(const struct XfStudy *study,
                                    double skin_frequency,
                                    struct XfLeakageResult *out);

/**
 * `volts` on `driven`, the other winding at 0 V: C = 2E/V² (F).
 *
 * # Safety
 * `study` must be a live handle; `out` a valid pointer.
 */
enum XfStatus xf_winding_capacitance(const struct XfStudy *study,
                                     enum XfCoreModel model,
                                     enum XfRole driven,
                                     double volts,
                                     double *out);

/**
 * Primary at `test_voltage`, secondary and core grounded; margins per insulating material.
 *
 * # Safety
 * `study` must be a live handle; `out` a valid pointer.
 */
enum XfStatus xf_dielectric_margin(const struct XfStudy *study,
                                   double test_voltage,
                                   struct XfDielectricResult *out);

/**
 * # Safety
 * `study` must be null or a handle from this library not yet freed.
 */
void xf_study_free(struct XfStudy *study);

/**
 * Core loss density (W/kg) from the four fit constants, peak flux density `b` (T), frequency
 * `f` (Hz) and duty cycle in (0, 1).
 *
 * # Safety
 * `out` must be a valid pointer.
 */
enum XfStatus xf_core_loss_density(double a,
                                   double b_const,
                                   double c,
                                   double d,
                                   double b,
                                   double f,
                                   double duty,
                                   double *out);

/**
 * Dowell AC resistance (Ω) for `layers` layers per portion.
 *
 * # Safety
 * `out` must be a valid pointer.
 */
enum XfStatus xf_dowell_ac_resistance(double r_dc,
                                      double layers,
                                      double thickness,
                                      double porosity,
                                      double f,
                                      double resistivity,
                                      double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* XFMR_FEM_H */
