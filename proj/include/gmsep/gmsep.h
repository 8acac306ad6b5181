#ifndef GMSEP_GMSEP_H
#define GMSEP_GMSEP_H

#include <stdint.h>

#if defined(_WIN32)
#if defined(GMSEP_BUILDING)
#define GMSEP_API __declspec(dllexport)
#else
#define GMSEP_API __declspec(dllimport)
#endif
#else
#define GMSEP_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

/* Status codes. Values are stable. */
typedef enum gm_status {
  GM_OK = 0,
  GM_DIMENSION_MISMATCH = 1,
  GM_NON_POSITIVE_EIGENVALUE = 2,
  GM_NON_ORTHONORMAL_ROTATION = 3,
  GM_TOO_FEW_SAMPLES = 4,
  GM_DEGENERATE_SAMPLE = 5,
  GM_INVALID_DELTA = 6,
  GM_MISSING_MEDIAN_RADIUS = 7,
  GM_INFEASIBLE_PLACEMENT = 8,
  GM_THRESHOLD_TOO_LARGE = 9,
  GM_NO_GAP_WITHIN_CAP = 10,
  GM_RESIDUAL_POINTS_AFTER_K_PEELS = 11,
  GM_EMPTY_PEEL = 12,
  GM_PAIR_NOT_SEPARATED = 13,
  GM_GRID_TOO_COARSE = 14,
  GM_TOO_FEW_POINTS = 15,
  GM_INSTANCE_TOO_LARGE = 16,
  GM_ZERO_SIGMA = 17,
  GM_INDEX_MISMATCH = 18,
  GM_PARSE_ERROR = 19,
  GM_SCHEMA_ERROR = 20,
  GM_IO_ERROR = 21,
  GM_INVALID_ARGUMENT = 22,
  GM_UNKNOWN = 99
} gm_status;

typedef struct gm_mixture gm_mixture;
typedef struct gm_samples gm_samples;
typedef struct gm_partition gm_partition;
typedef struct gm_fit_result gm_fit_result;

/* Message of the last failed call on this thread, "" if none. */
GMSEP_API const char* gm_last_error(void);
GMSEP_API const char* gm_status_name(gm_status status);
GMSEP_API const char* gm_version(void);

/* Strings returned through char** are owned by the caller. */
GMSEP_API void gm_string_free(char* text);

/* Mixtures */
GMSEP_API gm_status gm_mixture_load(const char* path, gm_mixture** out);
GMSEP_API gm_status gm_mixture_from_json(const char* json, gm_mixture** out);
GMSEP_API gm_status gm_mixture_save(const gm_mixture* mixture, const char* path);
GMSEP_API gm_status gm_mixture_to_json(const gm_mixture* mixture, char** out);

typedef struct gm_plant_options {
  int64_t n;
  int64_t k;
  double eig_lo;
  double eig_hi;
  int rotate;
  int paper_mode; /* nonzero: 500/100 constants, zero: 60/30 */
  double t;
  double slack;
  int64_t radius_samples; /* <= 0 for the default */
} gm_plant_options;

GMSEP_API gm_status gm_mixture_plant(const gm_plant_options* options, uint64_t seed, gm_mixture** out);
GMSEP_API gm_status gm_mixture_spherical(int64_t n, int64_t k, double sigma, double c_prime, double t,
                                         gm_mixture** out);
GMSEP_API gm_status gm_mixture_estimate_radii(gm_mixture* mixture, int64_t num_samples, uint64_t seed);
GMSEP_API int64_t gm_mixture_k(const gm_mixture* mixture);
GMSEP_API int64_t gm_mixture_dim(const gm_mixture* mixture);
GMSEP_API void gm_mixture_free(gm_mixture* mixture);

/* margin_out receives k*k row-major entries (NaN on the diagonal). */
GMSEP_API gm_status gm_separation_margin(const gm_mixture* mixture, double t, int paper_mode, double* margin_out,
                                         int* satisfied);
GMSEP_API gm_status gm_schedule_t(int64_t sample_size, double delta, double* out);

/* Samples */
GMSEP_API gm_status gm_samples_generate(const gm_mixture* mixture, int64_t count, uint64_t seed, gm_samples** out);
GMSEP_API gm_status gm_samples_from_array(const double* data, int64_t rows, int64_t cols, const int* labels,
                                          gm_samples** out);
GMSEP_API gm_status gm_samples_load(const char* path, gm_samples** out);
GMSEP_API gm_status gm_samples_save(const gm_samples* samples, const char* path);
GMSEP_API gm_status gm_samples_to_csv(const gm_samples* samples, char** out);
GMSEP_API int64_t gm_samples_count(const gm_samples* samples);
GMSEP_API int64_t gm_samples_dim(const gm_samples* samples);
GMSEP_API int gm_samples_has_labels(const gm_samples* samples);
/* Copies count labels; GM_INVALID_ARGUMENT when the set is unlabeled. */
GMSEP_API gm_status gm_samples_labels(const gm_samples* samples, int* out);
/* Copies count*dim coordinates, row-major. */
GMSEP_API gm_status gm_samples_data(const gm_samples* samples, double* out);
GMSEP_API void gm_samples_free(gm_samples* samples);

/* Classification */
typedef struct gm_classifier_options {
  int64_t k;
  double w_min;
  double delta;
  double t;         /* <= 0: use the schedule from |S| and delta */
  int64_t step_cap; /* <= 0: default cap */
} gm_classifier_options;

GMSEP_API gm_status gm_classify_general(const gm_samples* samples, const gm_classifier_options* options,
                                        gm_partition** out);
GMSEP_API gm_status gm_classify_spherical(const gm_samples* samples, int64_t k, double t, gm_partition** out);
GMSEP_API int64_t gm_partition_cluster_count(const gm_partition* partition);
GMSEP_API int64_t gm_partition_size(const gm_partition* partition);
GMSEP_API gm_status gm_partition_labels(const gm_partition* partition, int* out);
GMSEP_API gm_status gm_partition_save(const gm_partition* partition, const char* path);
/* GM_INVALID_ARGUMENT when the partition carries no trace. */
GMSEP_API gm_status gm_partition_trace_json(const gm_partition* partition, char** out);
GMSEP_API gm_status gm_partition_compare(const gm_partition* partition, const int* truth, int64_t count,
                                         int* exact_match, int64_t* agreement);
GMSEP_API void gm_partition_free(gm_partition* partition);

/* Spherical max-likelihood fit */
GMSEP_API gm_status gm_fit_spherical(const gm_samples* samples, int64_t k, uint64_t seed, int oracle,
                                     gm_fit_result** out);
GMSEP_API double gm_fit_objective(const gm_fit_result* fit);
GMSEP_API double gm_fit_sigma_hat(const gm_fit_result* fit);
GMSEP_API gm_status gm_fit_to_json(const gm_fit_result* fit, char** out);
GMSEP_API void gm_fit_free(gm_fit_result* fit);

/* Validators and experiments. config_json may be NULL for defaults. */
GMSEP_API gm_status gm_validate(const char* config_json, const char* suite, uint64_t seed, char** report_json);
GMSEP_API gm_status gm_run_experiment(const char* config_json, const char* base_dir, char** aggregate_json);

#ifdef __cplusplus
}
#endif

#endif
