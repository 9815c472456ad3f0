#ifndef CHERRY_CHERRY_H
#define CHERRY_CHERRY_H

/* C interface to the cherry yield toolkit.
 *
 * Objects are opaque handles released with their *_free function. Strings
 * returned through char** are heap copies released with cf_string_free;
 * const char* fields inside result structs stay valid until the owning
 * handle is freed. Every call returning cf_status leaves a message for
 * cf_last_error() on failure (per thread). */

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#  if defined(CHERRY_BUILDING_CAPI)
#    define CF_API __declspec(dllexport)
#  else
#    define CF_API __declspec(dllimport)
#  endif
#else
#  define CF_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum cf_status {
  CF_OK = 0,
  CF_INVALID_ARGUMENT = 1,
  CF_NOT_FOUND = 2,
  CF_INSUFFICIENT_DATA = 3,
  CF_DEGENERATE_PREDICTOR = 4,
  CF_DOMAIN_ERROR = 5,
  CF_NO_TARGET_DATA = 6,
  CF_NO_CALIBRATION = 7,
  CF_NO_WEIGHT_DATA = 8,
  CF_EMPTY_SCHEDULE = 9,
  CF_UNKNOWN_STAGE = 10,
  CF_EMPTY_INPUT = 11,
  CF_PARSE_ERROR = 12,
  CF_IO_ERROR = 13,
  CF_INTERNAL_ERROR = 99
} cf_status;

/* Object types, in development order. */
enum {
  CF_OBJECT_BUD = 0,
  CF_OBJECT_BLOSSOM = 1,
  CF_OBJECT_CHERRY = 2,
  CF_OBJECT_GOOD_CROPS = 3,
  CF_OBJECT_BAD_CROPS = 4,
  CF_OBJECT_TOTAL_CROPS = 5
};

enum { CF_SEVERITY_ERROR = 0, CF_SEVERITY_WARNING = 1 };
enum { CF_TREE_SUM_OF_BRANCHES = 0, CF_TREE_WHOLE = 1 };
enum { CF_SCOPE_BRANCH = 0, CF_SCOPE_TREE = 1 };
enum { CF_PLOT_TRAJECTORY = 0, CF_PLOT_TREE_AGGREGATE = 1, CF_PLOT_REGRESSION_GRID = 2 };

typedef struct cf_ledger cf_ledger;
typedef struct cf_violations cf_violations;
typedef struct cf_calibration cf_calibration;
typedef struct cf_forecast cf_forecast;
typedef struct cf_sim_params cf_sim_params;
typedef struct cf_recommendation cf_recommendation;

CF_API const char* cf_version(void);
CF_API const char* cf_last_error(void);
CF_API const char* cf_status_name(cf_status status);
CF_API void cf_string_free(char* text);

/* "bud", "goodCrops", ...; NULL for an unknown value. */
CF_API const char* cf_object_type_name(int object_type);
/* Returns -1 for an unknown spelling. Case-insensitive. */
CF_API int cf_object_type_parse(const char* text);

/* ---- ledger ---------------------------------------------------------- */

typedef struct cf_record {
  int year, month, day;
  int season;
  int bbch;
  const char* tree_id;
  const char* branch_id;
  const char* branch_color; /* NULL when absent */
  int object_type;
  int64_t object_count;
  int has_weight;
  double weight_kg;
} cf_record;

typedef struct cf_violation {
  int severity;
  const char* rule;
  const char* message;
  const char* keys; /* "; "-joined record keys */
  size_t row;       /* first source row, 0 when not from a file */
  const char* rows; /* all source rows, comma-joined; "" when none */
} cf_violation;

/* Parses ledger CSV and builds the validated ledger. Month-day dates take
 * `season` as their year. Header problems fail with CF_PARSE_ERROR; row
 * problems and rule findings go to *violations. Either output may be NULL
 * when not wanted. */
CF_API cf_status cf_ledger_parse(const char* text, size_t length, int season, char delimiter,
                                 cf_ledger** ledger, cf_violations** violations);
CF_API cf_status cf_ledger_read_file(const char* path, int season, char delimiter,
                                     cf_ledger** ledger, cf_violations** violations);
CF_API void cf_ledger_free(cf_ledger* ledger);
CF_API size_t cf_ledger_size(const cf_ledger* ledger);
/* 0 for an empty ledger. */
CF_API int cf_ledger_season(const cf_ledger* ledger);
CF_API size_t cf_ledger_branch_count(const cf_ledger* ledger);
CF_API cf_status cf_ledger_record(const cf_ledger* ledger, size_t index, cf_record* out);
CF_API cf_status cf_ledger_emit_csv(const cf_ledger* ledger, char delimiter, char** out);
CF_API cf_status cf_ledger_mean_fruit_weight(const cf_ledger* ledger, double* out_kg);

CF_API void cf_violations_free(cf_violations* violations);
CF_API size_t cf_violations_count(const cf_violations* violations);
CF_API size_t cf_violations_error_count(const cf_violations* violations);
CF_API cf_status cf_violation_get(const cf_violations* violations, size_t index,
                                  cf_violation* out);

/* ---- regression ------------------------------------------------------ */

typedef struct cf_fit {
  double slope, intercept;
  int has_r_squared;
  double r_squared;
  int has_p_value;
  double p_value;
  size_t n;
  double residual_se, sxx, mean_x, mean_y;
} cf_fit;

CF_API cf_status cf_fit_ols(const double* x, const double* y, size_t n, cf_fit* out);
CF_API cf_status cf_predict_interval(const cf_fit* fit, double x, double level, double* point,
                                     double* lower, double* upper);
CF_API cf_status cf_incomplete_beta(double x, double a, double b, double* out);
CF_API cf_status cf_p_value(double t, int df, double* out);
CF_API cf_status cf_t_critical(double level, int df, double* out);
/* "P<.001", "P<.01", "P<.05", "n.s."; NULL outside (0, 1]. */
CF_API const char* cf_p_value_band(double p);

/* ---- calibration ----------------------------------------------------- */

typedef struct cf_calibration_entry {
  int year, month, day;
  int bbch;
  int object_type;
  const char* label;
  const char* p_band;
  double slope, intercept;
  int has_r_squared;
  double r_squared;
  int has_p_value;
  double p_value;
  size_t n;
  int has_interval_stats;
  double residual_se;
} cf_calibration_entry;

CF_API cf_status cf_calibrate(const cf_ledger* ledger, int target, cf_calibration** out);
/* season 0 means: take it from the "# season=" line. */
CF_API cf_status cf_calibration_parse(const char* text, size_t length, int season,
                                      cf_calibration** out);
CF_API cf_status cf_calibration_read_file(const char* path, int season, cf_calibration** out);
CF_API void cf_calibration_free(cf_calibration* calibration);
CF_API cf_status cf_calibration_emit_csv(const cf_calibration* calibration, char** out);
CF_API int cf_calibration_season(const cf_calibration* calibration);
CF_API int cf_calibration_target(const cf_calibration* calibration);
CF_API size_t cf_calibration_count(const cf_calibration* calibration);
CF_API cf_status cf_calibration_entry_get(const cf_calibration* calibration, size_t index,
                                          cf_calibration_entry* out);
CF_API size_t cf_calibration_annotation_count(const cf_calibration* calibration);
CF_API const char* cf_calibration_annotation(const cf_calibration* calibration, size_t index);

/* ---- forecasts ------------------------------------------------------- */

typedef struct cf_forecast_options {
  double level;       /* coverage, e.g. 0.95 */
  int count_season;   /* 0 when unknown */
  int has_fruit_weight;
  double fruit_weight_kg;
} cf_forecast_options;

CF_API cf_forecast_options cf_forecast_options_default(void);

typedef struct cf_forecast_result {
  double point, lower, upper, level;
  int scope;
  int year, month, day;
  int bbch;
  const char* stage_label;
  int has_weight;
  double weight_kg;
} cf_forecast_result;

/* `stage` is "Jul-6" or "2023-07-06". An unknown stage fails with
 * CF_NO_CALIBRATION and lists the available ones. options may be NULL. */
CF_API cf_status cf_forecast_branch(const cf_calibration* calibration, const char* stage,
                                    double count, const cf_forecast_options* options,
                                    cf_forecast** out);
CF_API cf_status cf_forecast_tree(const cf_calibration* calibration, const char* stage,
                                  const double* counts, size_t n_counts, int mode,
                                  const cf_forecast_options* options, cf_forecast** out);
CF_API void cf_forecast_free(cf_forecast* forecast);
CF_API cf_status cf_forecast_get(const cf_forecast* forecast, cf_forecast_result* out);
CF_API size_t cf_forecast_annotation_count(const cf_forecast* forecast);
CF_API const char* cf_forecast_annotation(const cf_forecast* forecast, size_t index);

/* ---- timepoint recommendation ---------------------------------------- */

typedef struct cf_scoring_weights {
  double fit, earliness, risk;
} cf_scoring_weights;

typedef struct cf_recommendation_item {
  int year, month, day;
  int bbch;
  int object_type;
  const char* label;
  double score, r_squared, earliness, risk_mass;
  const char* rationale;
} cf_recommendation_item;

/* Default frost and drought windows. weights may be NULL for defaults. */
CF_API cf_status cf_recommend(const cf_calibration* calibration,
                              const cf_scoring_weights* weights, cf_recommendation** out);
CF_API void cf_recommendation_free(cf_recommendation* ranking);
CF_API size_t cf_recommendation_count(const cf_recommendation* ranking);
CF_API cf_status cf_recommendation_get(const cf_recommendation* ranking, size_t index,
                                       cf_recommendation_item* out);
/* Indices into the ranking; -1 when there is no such entry. */
CF_API void cf_recommendation_pair(const cf_recommendation* ranking, long* early,
                                   long* robust);

/* ---- simulation ------------------------------------------------------ */

CF_API cf_sim_params* cf_sim_params_default(void);
/* "key = value" text, see the README for the keys. */
CF_API cf_status cf_sim_params_parse(const char* text, size_t length, cf_sim_params** out);
CF_API cf_status cf_sim_params_read_file(const char* path, cf_sim_params** out);
/* Overrides one key as if appended to the parameter file. */
CF_API cf_status cf_sim_params_set(cf_sim_params* params, const char* key, const char* value);
CF_API void cf_sim_params_free(cf_sim_params* params);
CF_API cf_status cf_simulate_season(const cf_sim_params* params, int trees, int branches,
                                    cf_ledger** out);
CF_API cf_status cf_sim_expected_slope(const cf_sim_params* params, const char* stage_date,
                                       double* out);

/* ---- plots ----------------------------------------------------------- */

typedef struct cf_plot_spec {
  int kind;
  const char* output_path;
  int width, height;
  double level;
} cf_plot_spec;

CF_API cf_plot_spec cf_plot_spec_default(void);
/* ledger and calibration may be NULL where the kind does not need them. */
CF_API cf_status cf_render_svg(const cf_plot_spec* spec, const cf_ledger* ledger,
                               const cf_calibration* calibration, char** out);
CF_API cf_status cf_render_plot(const cf_plot_spec* spec, const cf_ledger* ledger,
                                const cf_calibration* calibration);

#ifdef __cplusplus
}
#endif

#endif
