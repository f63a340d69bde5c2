#ifndef BSCA_H
#define BSCA_H

/* C interface to the bsca library.
 *
 * Every fallible call returns a bsca_status; on failure the message is
 * available from bsca_last_error() on the same thread until the next call.
 * Handles are opaque and owned by the caller, who releases them with the
 * matching *_free function. Strings returned as const char* stay valid for
 * the lifetime of the handle they came from. */

#include <stddef.h>
#include <stdint.h>

#if defined(BSCA_BUILDING_LIBRARY)
#define BSCA_API __attribute__((visibility("default")))
#else
#define BSCA_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum bsca_status {
    BSCA_OK = 0,
    BSCA_ERR_CONFIG = 1,
    BSCA_ERR_PARSE = 2,
    BSCA_ERR_DOMAIN = 3,
    BSCA_ERR_COLLINEAR = 4,
    BSCA_ERR_SINGULAR_DESIGN = 5,
    BSCA_ERR_INSUFFICIENT_DATA = 6,
    BSCA_ERR_SEPARATION = 7,
    BSCA_ERR_NONCONVERGENCE = 8,
    BSCA_ERR_NO_VALID_MODEL = 9,
    BSCA_ERR_CAP_EXCEEDED = 10,
    BSCA_ERR_FAMILY = 11,
    BSCA_ERR_IO = 12,
    BSCA_ERR_INVALID_ARGUMENT = 13,
    BSCA_ERR_EMPTY_CURVE = 14,
    BSCA_ERR_DEGENERATE_SUBGROUP = 15,
    BSCA_ERR_UNSUPPORTED = 16,
    BSCA_ERR_INTERNAL = 99
} bsca_status;

typedef struct bsca_config bsca_config;
typedef struct bsca_result bsca_result;
typedef struct bsca_sim_result bsca_sim_result;

BSCA_API const char* bsca_version(void);
BSCA_API const char* bsca_status_name(bsca_status status);
BSCA_API const char* bsca_last_error(void);

/* Machine-readable error record for the last failure on this thread.
 * Release with bsca_string_free. */
BSCA_API char* bsca_error_json(bsca_status status, const char* command);
BSCA_API void bsca_string_free(char* s);

/* Configuration. */
BSCA_API bsca_status bsca_config_load(const char* path, bsca_config** out);
BSCA_API bsca_status bsca_config_parse(const char* json_text, const char* base_dir, bsca_config** out);
/* Keys: data, out, seed, engine, iters, burnin, gamma, threshold, draws,
 * method, sca_draws, top_models. */
BSCA_API bsca_status bsca_config_set(bsca_config* config, const char* key, const char* value);
BSCA_API const char* bsca_config_output_dir(const bsca_config* config);
BSCA_API void bsca_config_free(bsca_config* config);

/* Results of run, sca and plot: a set of named output files. */
BSCA_API bsca_status bsca_run(const bsca_config* config, bsca_result** out);
BSCA_API bsca_status bsca_sca(const bsca_config* config, bsca_result** out);
BSCA_API bsca_status bsca_plot(const char* results_dir, bsca_result** out);

BSCA_API size_t bsca_result_file_count(const bsca_result* result);
BSCA_API const char* bsca_result_file_name(const bsca_result* result, size_t index);
BSCA_API const char* bsca_result_file_contents(const bsca_result* result, size_t index, size_t* length);
BSCA_API bsca_status bsca_result_write(const bsca_result* result, const char* dir);
/* Per-outcome failures of a run that still produced output (0 otherwise). */
BSCA_API size_t bsca_result_error_count(const bsca_result* result);
BSCA_API bsca_status bsca_result_error(const bsca_result* result, size_t index, const char** message);
BSCA_API void bsca_result_free(bsca_result* result);

typedef struct bsca_summary {
    double mean;
    double lower;
    double upper;
    double p_inclusion;
    int reject;
} bsca_summary;

/* Treatment effect summaries of a run. */
BSCA_API size_t bsca_run_outcome_count(const bsca_result* result);
BSCA_API size_t bsca_run_treatment_count(const bsca_result* result);
BSCA_API bsca_status bsca_run_treatment(const bsca_result* result, size_t outcome, size_t treatment,
                                        bsca_summary* out);
/* GATE over all treatments; BSCA_ERR_INVALID_ARGUMENT when it was not computed. */
BSCA_API bsca_status bsca_run_gate(const bsca_result* result, bsca_summary* out);

typedef struct bsca_sca_summary {
    double median;
    double p_value;
    double share_significant;
    double mean_z;
    size_t estimates;
    size_t draws;
} bsca_sca_summary;

BSCA_API bsca_status bsca_sca_test(const bsca_result* result, bsca_sca_summary* out);

/* Monte Carlo simulations. */
typedef struct bsca_sim_options {
    const char* scenario; /* preset id, "5", "all", or path to a JSON scenario; NULL = "all" */
    int has_seed;
    uint64_t seed;
    double gamma;     /* < 0: scenario default */
    double threshold; /* < 0: scenario default */
    const char* method; /* "permutation" | "bootstrap" | NULL */
    size_t draws;       /* SCA resampling draws, 0 = default */
} bsca_sim_options;

BSCA_API void bsca_sim_options_init(bsca_sim_options* options);
BSCA_API bsca_status bsca_sim_run(const bsca_sim_options* options, bsca_sim_result** out);

typedef struct bsca_sim_row {
    const char* scenario;
    const char* estimator;
    const char* target;
    double truth;
    double bias;
    double rmse;
    double rejection_rate;
    size_t replicates;
    size_t failed;
} bsca_sim_row;

BSCA_API size_t bsca_sim_row_count(const bsca_sim_result* result);
BSCA_API bsca_status bsca_sim_row_at(const bsca_sim_result* result, size_t index, bsca_sim_row* out);
BSCA_API double bsca_sim_runtime_seconds(const bsca_sim_result* result);
BSCA_API const char* bsca_sim_tables(const bsca_sim_result* result);
BSCA_API bsca_status bsca_sim_write(const bsca_sim_result* result, const char* dir);
BSCA_API void bsca_sim_free(bsca_sim_result* result);

#ifdef __cplusplus
}
#endif

#endif /* BSCA_H */
