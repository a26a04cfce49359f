#ifndef SINAI_H
#define SINAI_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define SINAI_API __declspec(dllexport)
#else
#define SINAI_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum sinai_status {
  SINAI_OK = 0,
  SINAI_INVALID_ARGUMENT = 1,
  SINAI_WINDOW_EXHAUSTED = 2,
  SINAI_UNSUPPORTED = 3,
  SINAI_IO_ERROR = 4,
  SINAI_PARSE_ERROR = 5,
  SINAI_INTERNAL_ERROR = 6,
  SINAI_NOT_APPLICABLE = 7
} sinai_status;

typedef struct sinai_env sinai_env;
typedef struct sinai_landscape sinai_landscape;

SINAI_API const char* sinai_version(void);

/* Message of the last failed call on this thread; "" after a success. */
SINAI_API const char* sinai_last_error(void);

/* Strings returned through char** are owned by the caller. */
SINAI_API void sinai_string_free(char* s);

/* spec: JSON ({"family": "two-point-symmetric", "c": 1}) or shorthand
   ("two-point:1", "log-uniform:0.5"). */
SINAI_API sinai_status sinai_env_sample(const char* spec, uint64_t seed, int64_t lo, int64_t hi, sinai_env** out);
SINAI_API sinai_status sinai_env_from_json(const char* json, sinai_env** out);
SINAI_API sinai_status sinai_env_load(const char* path, sinai_env** out);
SINAI_API sinai_status sinai_env_to_json(const sinai_env* env, char** out);
SINAI_API sinai_status sinai_env_save(const sinai_env* env, const char* path);
SINAI_API void sinai_env_free(sinai_env* env);

SINAI_API sinai_status sinai_env_window(const sinai_env* env, int64_t* lo, int64_t* hi);
SINAI_API sinai_status sinai_env_rates(const sinai_env* env, int64_t x, double* minus, double* plus);
SINAI_API sinai_status sinai_env_potential(const sinai_env* env, int64_t x, double* v);
/* x,V,theta rows. */
SINAI_API sinai_status sinai_env_potential_csv(const sinai_env* env, char** out);

/* P_z(tau_a < tau_b). */
SINAI_API sinai_status sinai_ruin_probability(const sinai_env* env, int64_t a, int64_t z, int64_t b, double* out);
SINAI_API sinai_status sinai_lyapunov(const sinai_env* env, int64_t a, int64_t x, double* out);
SINAI_API sinai_status sinai_spectral_gap(const sinai_env* env, int64_t a, int64_t b, double* lambda,
                                          double* elevation);

/* Stable points, peaks, wells and landmarks of V at time scale t = e^log_t.
   Fails with SINAI_WINDOW_EXHAUSTED when the window is too small. */
SINAI_API sinai_status sinai_landscape_compute(const sinai_env* env, double log_t, sinai_landscape** out);
SINAI_API void sinai_landscape_free(sinai_landscape* land);
SINAI_API sinai_status sinai_landscape_to_json(const sinai_landscape* land, char** out);
SINAI_API sinai_status sinai_landscape_m_t(const sinai_landscape* land, int64_t* m_t);
SINAI_API sinai_status sinai_landscape_svg(const sinai_landscape* land, double eps, char** out);

/* One walk from `start`, run to time t or until it first enters `targets`
   (n_targets may be 0). The walk extends the environment when it leaves the
   window. outcome: JSON; trajectory: time,site CSV, may be NULL. */
SINAI_API sinai_status sinai_simulate(const sinai_env* env, int64_t start, double t, const int64_t* targets,
                                      size_t n_targets, uint64_t seed, uint64_t trial, char** outcome,
                                      char** trajectory);

/* Campaign configuration as JSON with every key at its default. */
SINAI_API sinai_status sinai_default_config(char** out);

/* Runs the claims selected by config (a JSON object, NULL for defaults).
   *all_pass is 1 when every claim passed. */
SINAI_API sinai_status sinai_verify(const char* config, char** report, int* all_pass);

/* CSV table of one claim of a report; "" when the claim has no table. */
SINAI_API sinai_status sinai_report_claim_csv(const char* report, const char* claim, char** out);
/* Histogram of (xi_t - m_t) / log^2 t from the localization claim. */
SINAI_API sinai_status sinai_report_histogram_svg(const char* report, char** out);

/* Annealed Gamma frequencies as CSV (one row per (t, eps) cell). */
SINAI_API sinai_status sinai_annealed_csv(const char* config, char** csv, int* all_pass);

#ifdef __cplusplus
}
#endif

#endif
