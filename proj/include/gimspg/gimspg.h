/*
 * C interface to the GIMSPG matrix completion library.
 *
 * All objects are opaque handles created by a *_create / constructor call
 * and released with the matching *_destroy. Every fallible call returns a
 * gimspg_status; on failure, gimspg_last_error() describes the problem for
 * the calling thread until its next failing call.
 *
 * Matrices cross the boundary as column-major double buffers.
 */
#ifndef GIMSPG_GIMSPG_H
#define GIMSPG_GIMSPG_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define GIMSPG_API __declspec(dllexport)
#elif defined(__GNUC__)
#define GIMSPG_API __attribute__((visibility("default")))
#else
#define GIMSPG_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum gimspg_status {
  GIMSPG_OK = 0,
  GIMSPG_ERR_INVALID_ARGUMENT = 1,
  GIMSPG_ERR_DOMAIN = 2,
  GIMSPG_ERR_NUMERIC = 3,
  GIMSPG_ERR_IO = 4,
  GIMSPG_ERR_CONFIG = 5,
  GIMSPG_ERR_INTERNAL = 6
} gimspg_status;

typedef struct gimspg_problem gimspg_problem;
typedef struct gimspg_solver_config gimspg_solver_config;
typedef struct gimspg_report gimspg_report;
typedef struct gimspg_experiment gimspg_experiment;

/* Noise model; pass NULL for noiseless observations. */
typedef struct gimspg_gmm {
  double var_a;
  double var_b;
  double c;
} gimspg_gmm;

/* One row of a solve trace. Row 0 is the starting point. */
typedef struct gimspg_trace_row {
  size_t k;
  double objective;
  double energy;
  double mu;
  double step_norm;
  size_t d_changes;
  double descent_gap;
} gimspg_trace_row;

GIMSPG_API const char* gimspg_version(void);
GIMSPG_API const char* gimspg_last_error(void);
GIMSPG_API const char* gimspg_status_string(gimspg_status status);

/* ---- solver configuration ---------------------------------------------
 * Keys: sigma_exp, mu0, a, beta, epsilon, tol, max_iters, seed,
 * kernel_modulus, enforce_v_bound. */
GIMSPG_API gimspg_status gimspg_solver_config_create(gimspg_solver_config** out);
GIMSPG_API void gimspg_solver_config_destroy(gimspg_solver_config* config);
GIMSPG_API gimspg_status gimspg_solver_config_set(gimspg_solver_config* config, const char* key,
                                                  const char* value);
GIMSPG_API gimspg_status gimspg_solver_config_get(const gimspg_solver_config* config,
                                                  const char* key, double* value);
/* Extrapolation weight alpha and inverse step h derived from beta. */
GIMSPG_API gimspg_status gimspg_schedule_params(double beta, double sigma_exp,
                                                double lipschitz_scale, double kernel_modulus,
                                                double epsilon, double* alpha, double* h);

/* ---- problems ----------------------------------------------------------
 * v <= 0 selects the default capping threshold 0.9 * lambda / sqrt(|Omega|). */
GIMSPG_API gimspg_status gimspg_problem_synthetic(size_t m, size_t n, size_t r, double sr,
                                                  const gimspg_gmm* noise, double lambda,
                                                  double v, uint64_t seed,
                                                  gimspg_problem** out);
/* Observed entries given as parallel arrays of 0-based indices and values.
 * truth may be NULL; otherwise it is an m x n column-major buffer. */
GIMSPG_API gimspg_status gimspg_problem_from_observations(size_t m, size_t n, size_t count,
                                                          const size_t* rows, const size_t* cols,
                                                          const double* values,
                                                          const double* truth, double lambda,
                                                          double v, gimspg_problem** out);
GIMSPG_API gimspg_status gimspg_problem_from_pgm(const char* path, double sr,
                                                 const gimspg_gmm* noise, double lambda, double v,
                                                 uint64_t seed, gimspg_problem** out);
GIMSPG_API void gimspg_problem_destroy(gimspg_problem* problem);
GIMSPG_API gimspg_status gimspg_problem_shape(const gimspg_problem* problem, size_t* m, size_t* n,
                                              size_t* observed);
GIMSPG_API gimspg_status gimspg_problem_penalty(const gimspg_problem* problem, double* lambda,
                                                double* v, double* lipschitz_f);
/* Relaxed and rank-penalized objectives of an m x n column-major X. */
GIMSPG_API gimspg_status gimspg_problem_objectives(const gimspg_problem* problem,
                                                   const double* x, double* relaxed,
                                                   double* l0);

/* ---- solving -----------------------------------------------------------
 * config may be NULL for defaults. */
GIMSPG_API gimspg_status gimspg_solve(const gimspg_problem* problem,
                                      const gimspg_solver_config* config, gimspg_report** out);
GIMSPG_API void gimspg_report_destroy(gimspg_report* report);

typedef struct gimspg_report_summary {
  size_t iters;
  double wall_time_s;
  double final_mu;
  double final_objective;
  size_t final_rank;
  size_t near_zero_count;
  size_t ns_count;
  size_t d_change_count;
  int truncated;
  double stationarity_residual;
  double alpha;
  double h;
} gimspg_report_summary;

GIMSPG_API gimspg_status gimspg_report_summary_get(const gimspg_report* report,
                                                   gimspg_report_summary* out);
/* Copies the final iterate (m x n, column-major) into buffer of length
 * capacity; fails if the report was loaded from disk. */
GIMSPG_API gimspg_status gimspg_report_x_final(const gimspg_report* report, double* buffer,
                                               size_t capacity);
/* RMSE and PSNR of the final iterate against the problem's ground truth. */
GIMSPG_API gimspg_status gimspg_report_metrics(const gimspg_report* report,
                                               const gimspg_problem* problem, double* rmse,
                                               double* psnr);
GIMSPG_API gimspg_status gimspg_report_trace_length(const gimspg_report* report, size_t* length);
GIMSPG_API gimspg_status gimspg_report_trace_row(const gimspg_report* report, size_t index,
                                                 gimspg_trace_row* out);
GIMSPG_API gimspg_status gimspg_report_export_trace(const gimspg_report* report,
                                                    const char* path);
GIMSPG_API gimspg_status gimspg_report_save(const gimspg_report* report, const char* path);
GIMSPG_API gimspg_status gimspg_report_load(const char* path, gimspg_report** out);

/* ---- experiment harness ------------------------------------------------ */
GIMSPG_API gimspg_status gimspg_experiment_create(gimspg_experiment** out);
GIMSPG_API void gimspg_experiment_destroy(gimspg_experiment* experiment);
GIMSPG_API gimspg_status gimspg_experiment_load_file(gimspg_experiment* experiment,
                                                     const char* path);
/* Names of the keys accepted by gimspg_experiment_set, index < count. */
GIMSPG_API size_t gimspg_experiment_key_count(void);
GIMSPG_API const char* gimspg_experiment_key(size_t index);
GIMSPG_API gimspg_status gimspg_experiment_set(gimspg_experiment* experiment, const char* key,
                                               const char* value);
/* Runs the configured sweep and writes its CSV. failed_cells receives the
 * number of solves that ended in an error; csv_path (optional) receives the
 * NUL-terminated output path, truncated to path_capacity. */
GIMSPG_API gimspg_status gimspg_experiment_run(const gimspg_experiment* experiment,
                                               size_t* failed_cells, char* csv_path,
                                               size_t path_capacity);

#ifdef __cplusplus
}
#endif

#endif /* GIMSPG_GIMSPG_H */
