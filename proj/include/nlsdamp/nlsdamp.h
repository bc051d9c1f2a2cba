#ifndef NLSDAMP_NLSDAMP_H
#define NLSDAMP_NLSDAMP_H

/*
 * C interface to libnlsdamp.
 *
 * Every function returns an nlsdamp_status. On failure a description is
 * available from nlsdamp_last_error() until the next call on the same thread.
 * Strings returned through char** out-parameters are owned by the caller and
 * must be released with nlsdamp_string_free(). Handles are released with their
 * matching *_free function; passing NULL to any *_free function is a no-op.
 */

#include <stddef.h>

#if defined(NLSDAMP_BUILDING)
#define NLSDAMP_API __attribute__((visibility("default")))
#else
#define NLSDAMP_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum nlsdamp_status {
  NLSDAMP_OK = 0,
  NLSDAMP_ERR_INTERNAL = 1,
  NLSDAMP_ERR_VALIDATION = 2, /* bad arguments, configs or preset names */
  NLSDAMP_ERR_NUMERICAL = 3,  /* a computation failed to produce a trustworthy result */
  NLSDAMP_ERR_IO = 4          /* filesystem, parse or hash problems */
} nlsdamp_status;

typedef struct nlsdamp_experiment nlsdamp_experiment;
typedef struct nlsdamp_manifest nlsdamp_manifest;
typedef struct nlsdamp_sweep_result nlsdamp_sweep_result;

NLSDAMP_API const char* nlsdamp_version(void);
NLSDAMP_API const char* nlsdamp_last_error(void);
NLSDAMP_API const char* nlsdamp_status_name(nlsdamp_status status);
NLSDAMP_API void nlsdamp_string_free(char* s);

/* Newline-separated preset names. */
NLSDAMP_API nlsdamp_status nlsdamp_list_presets(char** out);

/* Output root from the NLSDAMP_OUTPUT_ROOT environment variable, or the default. */
NLSDAMP_API nlsdamp_status nlsdamp_default_output_root(char** out);

/* Experiments ------------------------------------------------------------ */

NLSDAMP_API nlsdamp_status nlsdamp_experiment_from_preset(const char* name, nlsdamp_experiment** out);
NLSDAMP_API nlsdamp_status nlsdamp_experiment_from_file(const char* path, nlsdamp_experiment** out);
NLSDAMP_API nlsdamp_status nlsdamp_experiment_from_json(const char* json_text, nlsdamp_experiment** out);
/* Preset name or path to a JSON experiment file. */
NLSDAMP_API nlsdamp_status nlsdamp_experiment_resolve(const char* name_or_path, nlsdamp_experiment** out);
NLSDAMP_API nlsdamp_status nlsdamp_experiment_to_json(const nlsdamp_experiment* exp, char** out);
NLSDAMP_API nlsdamp_status nlsdamp_experiment_id(const nlsdamp_experiment* exp, char** out);
NLSDAMP_API void nlsdamp_experiment_free(nlsdamp_experiment* exp);

/* Runs the experiment under output_root (NULL selects the default root). */
NLSDAMP_API nlsdamp_status nlsdamp_run(const nlsdamp_experiment* exp, const char* output_root,
                                       nlsdamp_manifest** out);

NLSDAMP_API nlsdamp_status nlsdamp_manifest_load(const char* manifest_path, nlsdamp_manifest** out);
NLSDAMP_API nlsdamp_status nlsdamp_manifest_path(const nlsdamp_manifest* m, char** out);
NLSDAMP_API nlsdamp_status nlsdamp_manifest_json(const nlsdamp_manifest* m, char** out);
NLSDAMP_API void nlsdamp_manifest_free(nlsdamp_manifest* m);

/* NLSDAMP_OK when every listed file exists with the recorded hash. */
NLSDAMP_API nlsdamp_status nlsdamp_verify_manifest(const char* manifest_path);

/* Recomputes the analysis from the stored data; returns a JSON report. */
NLSDAMP_API nlsdamp_status nlsdamp_analyze(const char* manifest_path, char** report_json);

/* Sweeps ----------------------------------------------------------------- */

/* One experiment per value. Individual failures are recorded per item and do
 * not fail the sweep; the returned status covers setup errors only. */
NLSDAMP_API nlsdamp_status nlsdamp_sweep(const nlsdamp_experiment* base, const char* parameter,
                                         const double* values, size_t n_values, int parallelism,
                                         const char* output_root, nlsdamp_sweep_result** out);
NLSDAMP_API size_t nlsdamp_sweep_size(const nlsdamp_sweep_result* r);
/* Status of item i; NLSDAMP_ERR_VALIDATION when i is out of range. */
NLSDAMP_API nlsdamp_status nlsdamp_sweep_item_status(const nlsdamp_sweep_result* r, size_t i);
NLSDAMP_API nlsdamp_status nlsdamp_sweep_item_value(const nlsdamp_sweep_result* r, size_t i, double* out);
NLSDAMP_API nlsdamp_status nlsdamp_sweep_item_manifest(const nlsdamp_sweep_result* r, size_t i, char** out);
NLSDAMP_API nlsdamp_status nlsdamp_sweep_item_error(const nlsdamp_sweep_result* r, size_t i, char** out);
NLSDAMP_API void nlsdamp_sweep_free(nlsdamp_sweep_result* r);

/* Export ------------------------------------------------------------------ */

/* what: "ground_state", "q_profile", "reduced_trajectory" or "kappa_table";
 * params_json: a JSON object with the artifact's parameters. */
NLSDAMP_API nlsdamp_status nlsdamp_export(const char* what, const char* params_json, const char* path);

/* Scalar results ----------------------------------------------------------- */

NLSDAMP_API nlsdamp_status nlsdamp_find_s_star(double* out);
NLSDAMP_API nlsdamp_status nlsdamp_kappa_critical(double* out);
/* kappa(q) extrapolated over a strictly decreasing delta ladder. */
NLSDAMP_API nlsdamp_status nlsdamp_kappa_of_q(double q, int d, const double* deltas, size_t n_deltas,
                                              double* out);
/* Critical power ||R||_2^2 of the ground state for (d, p). */
NLSDAMP_API nlsdamp_status nlsdamp_critical_power(int d, double p, double* out);

#ifdef __cplusplus
}
#endif

#endif /* NLSDAMP_NLSDAMP_H */
