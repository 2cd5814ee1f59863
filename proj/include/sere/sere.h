/*
 * sere: spline-state recursive estimation library, C interface.
 *
 * All functions return a sere_status; SERE_OK (0) means success and any
 * other value identifies the failure class. The human-readable message for
 * the most recent failure on the calling thread is available through
 * sere_last_error(). Handles are opaque; every *_create has a matching
 * *_destroy, and strings returned through char** out-parameters must be
 * released with sere_string_free().
 */
#ifndef SERE_H
#define SERE_H

#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

#if defined(_WIN32)
#define SERE_API __declspec(dllexport)
#else
#define SERE_API __attribute__((visibility("default")))
#endif

typedef enum sere_status {
  SERE_OK = 0,
  SERE_ERR_OUT_OF_SEGMENT = 1,
  SERE_ERR_DIMENSION_MISMATCH = 2,
  SERE_ERR_NEGATIVE_VARIANCE = 3,
  SERE_ERR_ANCHOR_COINCIDES_WITH_POSITION = 4,
  SERE_ERR_SINGULAR_GEOMETRY = 5,
  SERE_ERR_INSUFFICIENT_INIT_DATA = 6,
  SERE_ERR_STALE_MEASUREMENT = 7,
  SERE_ERR_SINGULAR_INNOVATION = 8,
  SERE_ERR_UNSORTED_STREAM = 9,
  SERE_ERR_SCHEDULE_OUT_OF_RANGE = 10,
  SERE_ERR_LENGTH_MISMATCH = 11,
  SERE_ERR_SINGULAR_COVARIANCE = 12,
  SERE_ERR_CONFIG_PARSE = 13,
  SERE_ERR_IO = 14,
  SERE_ERR_SCHEMA_VIOLATION = 15,
  SERE_ERR_INVALID_ARGUMENT = 16,
  SERE_ERR_INTERNAL = 17
} sere_status;

/* Library version, e.g. "1.0.0". Static storage, do not free. */
SERE_API const char* sere_version(void);

/* Stable identifier for a status code, e.g. "StaleMeasurement". */
SERE_API const char* sere_status_name(sere_status status);

/* Message of the most recent failure on this thread ("" when none). The
 * pointer stays valid until the next failing call on the same thread. */
SERE_API const char* sere_last_error(void);

/* Releases a string allocated by this library. NULL is a no-op. */
SERE_API void sere_string_free(char* s);

/* ------------------------------------------------------------------ */
/* Configuration                                                      */

/* Expands a config document (presets applied, defaults filled in) into its
 * fully explicit JSON form. Pass a preset by name with the two-line document
 * {"preset": "case-study"}. */
SERE_API sere_status sere_config_render(const char* config_json, char** json_out);

/* Comma-separated list of built-in preset names. Static storage. */
SERE_API const char* sere_config_presets(void);

/* ------------------------------------------------------------------ */
/* Recursive estimator                                                */

typedef struct sere_filter sere_filter;

/* Creates a filter from the "filter" section (and spatial dimension) of a
 * config document. The handle starts uninitialized. */
SERE_API sere_status sere_filter_create(const char* config_json, sere_filter** out);
SERE_API void sere_filter_destroy(sere_filter* filter);

/* Spatial dimension d of the filter's trajectory. */
SERE_API int sere_filter_dim(const sere_filter* filter);
SERE_API int sere_filter_is_initialized(const sere_filter* filter);

/* Anchors its knot grid so t_first is the newest knot and replicates the
 * given position across the state. `position` has d entries. */
SERE_API sere_status sere_filter_init(sere_filter* filter, double t_first, const double* position,
                                      int dim);

/* Processes one measurement. `modality` is one of "gps", "toa", "tdoa",
 * "acc"; `value` carries value_len entries; anchors are indices into the
 * config's anchor table (-1 when unused). On success *accepted_out (if
 * non-NULL) is 1 when the update was applied, 0 when the gate rejected it. */
SERE_API sere_status sere_filter_ingest(sere_filter* filter, double t, const char* modality,
                                        const double* value, int value_len, int anchor_i,
                                        int anchor_j, int* accepted_out);

/* Posterior of the trajectory's `order`-th derivative (0 = position) at time
 * t, which must lie inside the live spline segment. `mean_out` receives d
 * entries; `cov_out` (if non-NULL) d*d entries, row-major. */
SERE_API sere_status sere_filter_interpolate(const sere_filter* filter, double t, int order,
                                             double* mean_out, double* cov_out);

/* Number of control points produced so far (archived + live window). */
SERE_API int sere_filter_control_point_count(const sere_filter* filter);

/* Copies all control points: knot_times_out (if non-NULL) receives one
 * timestamp per point, points_out (if non-NULL) count*d entries row-major.
 * Buffers must hold sere_filter_control_point_count() entries/rows. */
SERE_API sere_status sere_filter_control_points(const sere_filter* filter, double* knot_times_out,
                                                double* points_out);

/* ------------------------------------------------------------------ */
/* Experiment drivers (file to file)                                  */

typedef struct sere_run_options {
  int has_seed;       /* when nonzero, `seed` replaces the config's seed */
  uint64_t seed;
  int has_gate;       /* when nonzero, `gate` applies to every modality */
  double gate;
  int has_tau;        /* when nonzero, `tau` replaces the knot interval */
  double tau;
  int skip_stale;     /* tolerate late measurements instead of failing */
  int force;          /* overwrite existing output files */
} sere_run_options;

/* Each driver writes its primary output to out_path plus derived sibling
 * files, and (when summary_out is non-NULL) returns the JSON run summary.
 * `options` may be NULL for defaults. */
SERE_API sere_status sere_run_simulate(const char* config_json, const char* out_path,
                                       const sere_run_options* options, char** summary_out);
SERE_API sere_status sere_run_track(const char* config_json, const char* stream_path,
                                    const char* out_path, const sere_run_options* options,
                                    char** summary_out);
SERE_API sere_status sere_run_mc(const char* config_json, const char* out_path,
                                 const sere_run_options* options, char** summary_out);
SERE_API sere_status sere_run_evaluate(const char* config_json, const char* out_path,
                                       const sere_run_options* options, char** summary_out);
SERE_API sere_status sere_run_sweep(const char* config_json, const char* out_path,
                                    const sere_run_options* options, char** summary_out);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* SERE_H */
