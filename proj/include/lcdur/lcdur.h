/* C interface to the lane-change duration toolkit.
 *
 * Every fallible function returns an lcdur_status. On failure the message of
 * the most recent error on the calling thread is available through
 * lcdur_last_error(). Strings returned through `char**` out-parameters are
 * owned by the caller and released with lcdur_string_free(). */
#ifndef LCDUR_H
#define LCDUR_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#  if defined(LCDUR_BUILDING)
#    define LCDUR_API __declspec(dllexport)
#  else
#    define LCDUR_API __declspec(dllimport)
#  endif
#else
#  define LCDUR_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum lcdur_status {
  LCDUR_OK = 0,
  LCDUR_INVALID_ARGUMENT = 1,
  LCDUR_MISSING_FILE = 2,
  LCDUR_MALFORMED_ROW = 3,
  LCDUR_UNKNOWN_VEHICLE_CLASS = 4,
  LCDUR_INCONSISTENT_FRAME_SEQUENCE = 5,
  LCDUR_UNKNOWN_TRACK = 6,
  LCDUR_MISSING_DATA = 7,
  LCDUR_EMPTY_SAMPLE = 8,
  LCDUR_EXACT_MODE_TOO_LARGE = 9,
  LCDUR_DEGENERATE_SAMPLE = 10,
  LCDUR_NON_POSITIVE_DURATION = 11,
  LCDUR_DOMAIN_ERROR = 12,
  LCDUR_OVERLAPPING_EVENTS = 13,
  LCDUR_EVENT_OUTSIDE_RECORDING = 14,
  LCDUR_INCONSISTENT_EVENT_CHAIN = 15,
  LCDUR_MISSING_GROUP = 16,
  LCDUR_IO = 17,
  LCDUR_INTERNAL = 99
} lcdur_status;

typedef enum lcdur_vehicle_class { LCDUR_CAR = 0, LCDUR_TRUCK = 1 } lcdur_vehicle_class;
typedef enum lcdur_direction { LCDUR_LEFT = 0, LCDUR_RIGHT = 1 } lcdur_direction;
typedef enum lcdur_test_mode { LCDUR_TEST_AUTO = 0, LCDUR_TEST_EXACT = 1, LCDUR_TEST_APPROX = 2 } lcdur_test_mode;
typedef enum lcdur_nav_speed { LCDUR_NAV_SPEED_MEAN = 0, LCDUR_NAV_SPEED_AT_START = 1 } lcdur_nav_speed;

typedef struct lcdur_dataset lcdur_dataset;
typedef struct lcdur_events lcdur_events;
typedef struct lcdur_model_set lcdur_model_set;

LCDUR_API const char* lcdur_version(void);
/* "ok", "invalid_argument", ... Never NULL. */
LCDUR_API const char* lcdur_status_name(lcdur_status status);
/* Message of the last failure on this thread; "" if none. */
LCDUR_API const char* lcdur_last_error(void);
LCDUR_API void lcdur_string_free(char* s);

/* ---- Recordings ---------------------------------------------------------- */

LCDUR_API lcdur_status lcdur_dataset_create(lcdur_dataset** out);
LCDUR_API void lcdur_dataset_free(lcdur_dataset* dataset);
LCDUR_API lcdur_status lcdur_dataset_load(lcdur_dataset* dataset, const char* tracks_csv,
                                          const char* tracks_meta_csv, const char* recording_meta_csv);
/* Loads every complete recording triple found in `dir`. */
LCDUR_API lcdur_status lcdur_dataset_load_dir(lcdur_dataset* dataset, const char* dir, size_t* loaded);
LCDUR_API size_t lcdur_dataset_recording_count(const lcdur_dataset* dataset);
LCDUR_API lcdur_status lcdur_dataset_validation_json(const lcdur_dataset* dataset, char** out_json);

/* ---- Extraction ---------------------------------------------------------- */

typedef struct lcdur_extract_config {
  double lateral_velocity_threshold; /* m/s */
  int smoothing_half_window;         /* frames */
  double max_search_window_s;
  double settle_window_s;
  double lane_debounce_s; /* merge lane-id flicker shorter than this */
  lcdur_nav_speed nav_speed;
} lcdur_extract_config;

LCDUR_API void lcdur_extract_config_default(lcdur_extract_config* config);
/* `config` may be NULL for the defaults. */
LCDUR_API lcdur_status lcdur_extract(const lcdur_dataset* dataset, const lcdur_extract_config* config,
                                     lcdur_events** out);

typedef struct lcdur_event {
  int recording_id;
  int track_id;
  lcdur_vehicle_class vehicle_class;
  lcdur_direction direction;
  int origin_lane;
  int target_lane;
  int64_t start_frame;
  int64_t cross_frame;
  int64_t end_frame;
  double duration_s;
  double t1_s;
  double t2_s;
  double nav_speed_mps;
} lcdur_event;

LCDUR_API lcdur_status lcdur_events_read_csv(const char* path, lcdur_events** out);
LCDUR_API lcdur_status lcdur_events_parse_csv(const char* content, lcdur_events** out);
LCDUR_API void lcdur_events_free(lcdur_events* events);
LCDUR_API size_t lcdur_events_count(const lcdur_events* events);
LCDUR_API size_t lcdur_events_rejection_count(const lcdur_events* events);
LCDUR_API lcdur_status lcdur_events_get(const lcdur_events* events, size_t index, lcdur_event* out);
LCDUR_API lcdur_status lcdur_events_to_csv(const lcdur_events* events, char** out_csv);
LCDUR_API lcdur_status lcdur_events_rejections_csv(const lcdur_events* events, char** out_csv);

/* ---- Analysis and report ------------------------------------------------- */

typedef struct lcdur_analysis_config {
  const double* car_bins; /* NULL keeps the default edges */
  size_t car_bin_count;
  const double* truck_bins; /* NULL keeps the default edges */
  size_t truck_bin_count;
  lcdur_test_mode test_mode;
} lcdur_analysis_config;

LCDUR_API void lcdur_analysis_config_default(lcdur_analysis_config* config);
/* Writes table_*.csv, table_*.md and cdf_*.csv into out_dir. */
LCDUR_API lcdur_status lcdur_analyze(const lcdur_events* events, const lcdur_analysis_config* config,
                                     const char* out_dir);
/* lcdur_analyze plus models.json and summary.json. `out_summary_json` may be NULL. */
LCDUR_API lcdur_status lcdur_report(const lcdur_events* events, const lcdur_analysis_config* config,
                                    const char* out_dir, char** out_summary_json);

/* ---- Log-normal models --------------------------------------------------- */

typedef struct lcdur_model {
  lcdur_vehicle_class vehicle_class;
  lcdur_direction direction;
  double mu;
  double sigma;
  size_t n;
  double log_likelihood;
} lcdur_model;

LCDUR_API lcdur_status lcdur_lognormal_fit(const double* durations, size_t n, lcdur_model* out);
LCDUR_API lcdur_status lcdur_lognormal_pdf(const lcdur_model* model, double x, double* out);
LCDUR_API lcdur_status lcdur_lognormal_cdf(const lcdur_model* model, double x, double* out);
LCDUR_API lcdur_status lcdur_lognormal_quantile(const lcdur_model* model, double q, double* out);
/* Fills out[0..n). */
LCDUR_API lcdur_status lcdur_lognormal_sample(const lcdur_model* model, size_t n, uint64_t seed,
                                              double* out);

/* Fits the four class x direction groups; fails with LCDUR_MISSING_GROUP. */
LCDUR_API lcdur_status lcdur_fit(const lcdur_events* events, lcdur_model_set** out);
LCDUR_API lcdur_status lcdur_models_parse_json(const char* json, lcdur_model_set** out);
LCDUR_API lcdur_status lcdur_models_to_json(const lcdur_model_set* models, char** out_json);
LCDUR_API void lcdur_models_free(lcdur_model_set* models);
LCDUR_API size_t lcdur_models_count(const lcdur_model_set* models);
LCDUR_API lcdur_status lcdur_models_get(const lcdur_model_set* models, size_t index, lcdur_model* out);
LCDUR_API lcdur_status lcdur_models_find(const lcdur_model_set* models, lcdur_vehicle_class vehicle_class,
                                         lcdur_direction direction, lcdur_model* out);

/* ---- Mann-Whitney U ------------------------------------------------------ */

typedef struct lcdur_mwu_result {
  double u_statistic;
  double z_value; /* valid when has_z_value */
  int has_z_value;
  double p_two_sided;
  size_t n_a;
  size_t n_b;
  int exact; /* 1 exact distribution, 0 normal approximation */
  int reject; /* p < 0.05 */
} lcdur_mwu_result;

LCDUR_API lcdur_status lcdur_mwu_test(const double* a, size_t n_a, const double* b, size_t n_b,
                                      lcdur_test_mode mode, lcdur_mwu_result* out);

/* ---- Synthetic recordings ------------------------------------------------ */

typedef struct lcdur_synth_options {
  uint64_t seed;
  int recording_id;
  int n_vehicles; /* 0: twice the event count */
  int n_events;
  double truck_fraction;
  int lane_count;
  double frame_rate;
  double noise_std; /* m */
} lcdur_synth_options;

LCDUR_API void lcdur_synth_options_default(lcdur_synth_options* options);
/* Writes the recording triple and ground_truth.json into out_dir. */
LCDUR_API lcdur_status lcdur_synth_generate(const lcdur_synth_options* options, const char* out_dir);

#ifdef __cplusplus
}
#endif

#endif /* LCDUR_H */
