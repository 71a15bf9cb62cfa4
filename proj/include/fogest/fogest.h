/* C interface to the fog-parameter estimation library.
 *
 * Conventions:
 *  - Every fallible function returns a fogest_status; FOGEST_OK is zero.
 *  - On failure, fogest_last_error() returns a message for the calling thread.
 *    It stays valid until the next failing call on that thread.
 *  - Objects are opaque handles created by *_create / *_load functions and
 *    released with the matching *_destroy function. Passing NULL to a destroy
 *    function is a no-op.
 *  - Strings returned through char** are owned by the caller and must be
 *    released with fogest_string_free().
 *  - Handles are not internally synchronized. Distinct handles may be used
 *    from different threads concurrently.
 */
#ifndef FOGEST_FOGEST_H
#define FOGEST_FOGEST_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#if defined(FOGEST_BUILDING_LIBRARY)
#define FOGEST_API __declspec(dllexport)
#else
#define FOGEST_API __declspec(dllimport)
#endif
#else
#define FOGEST_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum fogest_status {
  FOGEST_OK = 0,
  FOGEST_ERR_INVALID_ARGUMENT = 1,
  FOGEST_ERR_RANGE = 2,
  FOGEST_ERR_PARSE = 3,
  FOGEST_ERR_VALIDATION = 4,
  FOGEST_ERR_NOT_ENOUGH_DATA = 5,
  FOGEST_ERR_DEGENERATE_DATA = 6,
  FOGEST_ERR_NUMERIC = 7,
  FOGEST_ERR_IO = 8,
  FOGEST_ERR_INTERNAL = 9
} fogest_status;

typedef enum fogest_channel {
  FOGEST_CHANNEL_GRAY = 0,
  FOGEST_CHANNEL_RED = 1,
  FOGEST_CHANNEL_GREEN = 2,
  FOGEST_CHANNEL_BLUE = 3
} fogest_channel;

FOGEST_API const char* fogest_version(void);
FOGEST_API const char* fogest_last_error(void);
FOGEST_API const char* fogest_status_string(fogest_status status);
FOGEST_API void fogest_string_free(char* s);

/* Parses "gray", "red", "green" or "blue". */
FOGEST_API fogest_status fogest_channel_parse(const char* name, fogest_channel* out);

/* ---- Scattering model ---------------------------------------------------- */

FOGEST_API fogest_status fogest_transmission(double beta, double d, double* out);
FOGEST_API fogest_status fogest_visibility_from_beta(double beta, double* out);
FOGEST_API fogest_status fogest_beta_from_visibility(double visibility, double* out);
FOGEST_API fogest_status fogest_predict_radiance(double lc, double beta, double l_inf, double d, double* out);
FOGEST_API fogest_status fogest_synthesize_fog_pixel(double j, double beta_int, double a, double d, double* out);

/* ---- Images and rasters -------------------------------------------------- */

typedef struct fogest_image fogest_image;

/* `data` holds width*height*channels values, row-major, channel-interleaved. */
FOGEST_API fogest_status fogest_image_create(int width, int height, int channels, const double* data,
                                             fogest_image** out);
FOGEST_API fogest_status fogest_image_load_pnm(const char* path, fogest_image** out);
/* Rounds and clamps to 8 bits before writing. */
FOGEST_API fogest_status fogest_image_save_pnm(const fogest_image* image, const char* path);
FOGEST_API fogest_status fogest_raster_load(const char* path, fogest_image** out);
FOGEST_API fogest_status fogest_raster_save(const fogest_image* raster, const char* path);
FOGEST_API fogest_status fogest_image_info(const fogest_image* image, int* width, int* height, int* channels);
/* Borrowed pointer, valid until the image is destroyed. */
FOGEST_API fogest_status fogest_image_data(const fogest_image* image, const double** data);
FOGEST_API void fogest_image_destroy(fogest_image* image);

/* `count` parameter pairs: one per image channel, or one shared by all.
 * max_distance <= 0 disables distance clamping. The result is unquantized. */
FOGEST_API fogest_status fogest_synthesize_fog_image(const fogest_image* clear, const fogest_image* distance_map,
                                                     const double* beta_int, const double* a, size_t count,
                                                     double max_distance, fogest_image** out);
FOGEST_API fogest_status fogest_distance_from_depth(const fogest_image* depth, double fx, double fy, double cx,
                                                    double cy, fogest_image** out);

/* ---- Photometry ---------------------------------------------------------- */

typedef struct fogest_gamma_maps fogest_gamma_maps;

FOGEST_API fogest_status fogest_gamma_maps_create_identity(fogest_gamma_maps** out);
FOGEST_API fogest_status fogest_gamma_maps_load(const char* path, fogest_gamma_maps** out);
FOGEST_API fogest_status fogest_gamma_maps_save(const fogest_gamma_maps* maps, const char* path);
FOGEST_API fogest_status fogest_gamma_maps_set(fogest_gamma_maps* maps, fogest_channel channel, double alpha,
                                               double gamma, double zeta);
FOGEST_API fogest_status fogest_gamma_maps_get(const fogest_gamma_maps* maps, fogest_channel channel, double* alpha,
                                               double* gamma, double* zeta);
FOGEST_API void fogest_gamma_maps_destroy(fogest_gamma_maps* maps);

FOGEST_API fogest_status fogest_gamma_expand(const fogest_gamma_maps* maps, fogest_channel channel, double intensity,
                                             double* out);
FOGEST_API fogest_status fogest_gamma_compress(const fogest_gamma_maps* maps, fogest_channel channel,
                                               double radiance, int clamp, double* out);

FOGEST_API fogest_status fogest_fit_gamma(const double* intensity, const double* power, size_t count, double* alpha,
                                          double* gamma, double* zeta, double* residual_norm);
/* Fits every channel present in a calibration CSV. Channels without samples
 * stay identity. `fitted_mask` (optional) receives bit c set for fitted channel c. */
FOGEST_API fogest_status fogest_fit_gamma_csv(const char* csv_path, fogest_gamma_maps** out, unsigned* fitted_mask);

/* ---- Local maps ---------------------------------------------------------- */

typedef struct fogest_map fogest_map;

FOGEST_API fogest_status fogest_map_create(int channels, fogest_map** out);
FOGEST_API fogest_status fogest_map_load(const char* path, fogest_map** out);
FOGEST_API fogest_status fogest_map_save(const fogest_map* map, const char* path);
/* `position` may be NULL, otherwise three coordinates. */
FOGEST_API fogest_status fogest_map_add_frame(fogest_map* map, int64_t id, const double* position);
FOGEST_API fogest_status fogest_map_add_landmark(fogest_map* map, int64_t id, const double* position);
/* `intensity` holds one value per map channel. */
FOGEST_API fogest_status fogest_map_add_edge(fogest_map* map, int64_t frame, int64_t landmark, double distance,
                                             const double* intensity);
FOGEST_API fogest_status fogest_map_counts(const fogest_map* map, size_t* frames, size_t* landmarks, size_t* edges);
/* Frame ids in increasing order. Writes up to `capacity` ids; `count` gets the total. */
FOGEST_API fogest_status fogest_map_frame_ids(const fogest_map* map, int64_t* ids, size_t capacity, size_t* count);
/* `has_position` is set to 0 when the frame carries no position. */
FOGEST_API fogest_status fogest_map_frame_position(const fogest_map* map, int64_t id, double* position,
                                                   int* has_position);
FOGEST_API fogest_status fogest_map_restrict(const fogest_map* map, const int64_t* frame_ids, size_t count,
                                             fogest_map** out);
/* Number of landmarks observed in at least xi_f frames. */
FOGEST_API fogest_status fogest_map_qualifying_landmarks(const fogest_map* map, int xi_f, size_t* out);
FOGEST_API void fogest_map_destroy(fogest_map* map);

/* ---- Estimator ----------------------------------------------------------- */

typedef struct fogest_estimator_config {
  double eta;          /* slope threshold, intensity levels per metre */
  double delta;        /* Huber threshold, intensity levels */
  double beta_lower;   /* 1/m */
  double beta_upper;   /* 1/m */
  double update_gate;  /* metres */
  int xi_f;
  int xi_k;
  double initial_beta;
  int two_stage;        /* nonzero: Huber stage followed by the inlier stage */
  int uniform_weights;  /* nonzero: w = 1 instead of the adaptive weights */
  int max_iterations;
  double gradient_tolerance;
  double step_tolerance;
  double initial_damping;
} fogest_estimator_config;

FOGEST_API void fogest_estimator_config_default(fogest_estimator_config* config);

typedef struct fogest_estimate {
  double beta;
  double l_inf;
  double visibility;
  double inlier_fraction;
  double stage1_cost;
  double stage2_cost; /* zero when no second stage ran */
  double threshold;   /* radiance-domain Huber and inlier threshold */
  size_t landmarks;
  size_t observations;
  size_t inliers;
  int stage1_iterations;
  int stage2_iterations;
  int degraded; /* nonzero: no inliers, stage-1 result returned */
} fogest_estimate;

typedef struct fogest_estimator fogest_estimator;

FOGEST_API fogest_status fogest_estimator_create(const fogest_estimator_config* config, fogest_estimator** out);
FOGEST_API void fogest_estimator_destroy(fogest_estimator* estimator);
/* Runs one estimate on a local map and carries the state forward. */
FOGEST_API fogest_status fogest_estimator_update(fogest_estimator* estimator, const fogest_map* map,
                                                 const fogest_gamma_maps* maps, fogest_channel channel,
                                                 fogest_estimate* out);
FOGEST_API fogest_status fogest_estimator_should_update(const fogest_estimator* estimator, const double* position,
                                                        int* out);
FOGEST_API fogest_status fogest_estimator_mark_updated(fogest_estimator* estimator, const double* position);
/* Latest clear-radiance estimate of a landmark. */
FOGEST_API fogest_status fogest_estimator_landmark_radiance(const fogest_estimator* estimator, int64_t landmark,
                                                            double* out);

/* ---- Baselines ----------------------------------------------------------- */

FOGEST_API fogest_status fogest_dark_channel(const fogest_image* image, int patch_radius, fogest_image** out);
/* One value per image channel. `modified` selects the median variant. */
FOGEST_API fogest_status fogest_estimate_a(const fogest_image* image, int patch_radius, int modified, double* a,
                                           size_t capacity, size_t* count);

typedef struct fogest_histogram_config {
  double bin_width;             /* 1/m */
  double min_inverse_depth_gap; /* 1/m */
  int bounded;
  double lower;
  double upper;
} fogest_histogram_config;

FOGEST_API void fogest_histogram_config_default(fogest_histogram_config* config);

typedef struct fogest_histogram fogest_histogram;

/* Pairwise beta votes over landmarks seen in at least xi_f frames of the map. */
FOGEST_API fogest_status fogest_beta_histogram(const fogest_map* map, fogest_channel channel, double a, int xi_f,
                                               const fogest_histogram_config* config, fogest_histogram** out);
FOGEST_API fogest_status fogest_histogram_beta(const fogest_histogram* histogram, double* beta, size_t* accepted);
FOGEST_API fogest_status fogest_histogram_bins(const fogest_histogram* histogram, double* centers, size_t* counts,
                                               size_t capacity, size_t* bin_count);
FOGEST_API fogest_status fogest_histogram_save(const fogest_histogram* histogram, const char* path);
FOGEST_API void fogest_histogram_destroy(fogest_histogram* histogram);

/* ---- Simulation and experiments ----------------------------------------- */

/* Scene config JSON (see docs/file_formats.md). `maps` may be NULL for an
 * identity map; the gray map is used. `seed` overrides the config's noise
 * seed when non-NULL. `truth_json` (optional) receives the ground truth. */
FOGEST_API fogest_status fogest_simulate(const char* config_json, const fogest_gamma_maps* maps, const uint64_t* seed,
                                         fogest_map** map_out, char** truth_json);

typedef enum fogest_noise_domain { FOGEST_NOISE_INTENSITY = 0, FOGEST_NOISE_RADIANCE = 1 } fogest_noise_domain;

typedef struct fogest_gamma_bias_config {
  int trials;
  double beta;
  double l_inf;
  double gamma; /* map 255^(1-gamma) * I^gamma */
  double noise_std;
  fogest_noise_domain noise_domain;
  int quantize;
  uint64_t seed;
  int landmarks;
} fogest_gamma_bias_config;

FOGEST_API void fogest_gamma_bias_config_default(fogest_gamma_bias_config* config);

typedef struct fogest_gamma_bias_summary {
  size_t trials;
  size_t failed;
  double mean_beta_radiance;
  double mean_beta_intensity;
  double fraction_intensity_greater; /* over successful trials */
} fogest_gamma_bias_summary;

typedef struct fogest_gamma_bias fogest_gamma_bias;

FOGEST_API fogest_status fogest_gamma_bias_run(const fogest_gamma_bias_config* config, fogest_gamma_bias** out);
FOGEST_API fogest_status fogest_gamma_bias_summary_get(const fogest_gamma_bias* result,
                                                       fogest_gamma_bias_summary* out);
FOGEST_API fogest_status fogest_gamma_bias_trial(const fogest_gamma_bias* result, size_t index, int* ok,
                                                 double* beta_radiance, double* beta_intensity);
/* CSV: trial,ok,beta_radiance,beta_intensity,error */
FOGEST_API fogest_status fogest_gamma_bias_save_csv(const fogest_gamma_bias* result, const char* path);
FOGEST_API void fogest_gamma_bias_destroy(fogest_gamma_bias* result);

typedef struct fogest_recovery_config {
  uint64_t seed;
  unsigned threads;
  double noise_std;
  int quantize;
  double outlier_fraction;
  double outlier_magnitude;
  int landmarks;
  int frames;
  int window;
} fogest_recovery_config;

FOGEST_API void fogest_recovery_config_default(fogest_recovery_config* config);

typedef struct fogest_metrics {
  double rmse;
  double mae;
  double sd;
  double bias;
  double rmse_rel; /* percent */
  double mae_rel;
  double sd_rel;
  size_t count;
} fogest_metrics;

typedef struct fogest_recovery fogest_recovery;

#define FOGEST_METHOD_COUNT 5
/* Method index 0..FOGEST_METHOD_COUNT-1: ours, ours-one-stage,
 * ours-uniform-weight, li-modified, li-original. */
FOGEST_API const char* fogest_method_name(int method);

FOGEST_API fogest_status fogest_recovery_run(const fogest_recovery_config* config, fogest_recovery** out);
FOGEST_API fogest_status fogest_recovery_summary(const fogest_recovery* result, int method, fogest_metrics* beta,
                                                 fogest_metrics* l_inf, size_t* failures);
/* Writes recovery_estimates.csv, recovery_scenarios.csv, recovery_summary.csv. */
FOGEST_API fogest_status fogest_recovery_save(const fogest_recovery* result, const char* directory);
FOGEST_API void fogest_recovery_destroy(fogest_recovery* result);

/* Unbounded and bounded histograms on one noisy scene with a perturbed A. */
FOGEST_API fogest_status fogest_histogram_demo(double visibility, double a, double a_error, uint64_t seed,
                                               fogest_histogram** unbounded, fogest_histogram** bounded);

/* ---- Metrics ------------------------------------------------------------- */

/* `truth` holds `count` values, or is NULL to use `truth_scalar` for all. */
FOGEST_API fogest_status fogest_compute_metrics(const double* estimates, size_t count, const double* truth,
                                                double truth_scalar, fogest_metrics* out);
/* Metrics of one CSV column against another column or, when `truth_column`
 * is NULL, against `truth_scalar`. */
FOGEST_API fogest_status fogest_metrics_from_csv(const char* path, const char* column, const char* truth_column,
                                                 double truth_scalar, fogest_metrics* out);
/* Writes a one-row metrics CSV with the given label and parameter name. */
FOGEST_API fogest_status fogest_metrics_save_csv(const fogest_metrics* metrics, const char* label,
                                                 const char* parameter, const char* path);

#ifdef __cplusplus
}
#endif

#endif /* FOGEST_FOGEST_H */
