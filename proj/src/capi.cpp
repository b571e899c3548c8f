#include "gimspg/gimspg.h"

#include <cstring>
#include <memory>
#include <new>
#include <optional>
#include <string>

#include "gimspg/error.hpp"
#include "gimspg/experiment.hpp"
#include "gimspg/io.hpp"
#include "gimspg/metrics.hpp"
#include "gimspg/problems.hpp"
#include "gimspg/solver.hpp"

struct gimspg_problem {
  gimspg::CompletionProblem value;
};

struct gimspg_solver_config {
  gimspg::SolverConfig value;
};

struct gimspg_report {
  gimspg::SolveReport value;
  bool has_iterate = true;
};

struct gimspg_experiment {
  gimspg::ExperimentConfig value;
};

namespace {

thread_local std::string last_error;

gimspg_status to_status(gimspg::ErrorCode code) {
  switch (code) {
    case gimspg::ErrorCode::kInvalidArgument: return GIMSPG_ERR_INVALID_ARGUMENT;
    case gimspg::ErrorCode::kDomain: return GIMSPG_ERR_DOMAIN;
    case gimspg::ErrorCode::kNumeric: return GIMSPG_ERR_NUMERIC;
    case gimspg::ErrorCode::kIo: return GIMSPG_ERR_IO;
    case gimspg::ErrorCode::kConfig: return GIMSPG_ERR_CONFIG;
  }
  return GIMSPG_ERR_INTERNAL;
}

gimspg_status set_error(gimspg_status status, const std::string& what) {
  last_error = what;
  return status;
}

template <class F>
gimspg_status guarded(F&& body) {
  try {
    body();
    return GIMSPG_OK;
  } catch (const gimspg::Error& e) {
    return set_error(to_status(e.code()), e.what());
  } catch (const std::bad_alloc&) {
    return set_error(GIMSPG_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return set_error(GIMSPG_ERR_INTERNAL, e.what());
  }
}

void require(const void* p, const char* name) {
  if (p == nullptr) {
    gimspg::fail(gimspg::ErrorCode::kInvalidArgument, std::string(name) + " must not be null");
  }
}

std::optional<gimspg::GmmNoiseParams> noise_from(const gimspg_gmm* noise) {
  if (noise == nullptr) return std::nullopt;
  return gimspg::GmmNoiseParams{noise->var_a, noise->var_b, noise->c};
}

std::optional<double> v_from(double v) {
  if (v > 0.0) return v;
  return std::nullopt;
}

gimspg::Matrix matrix_from(const double* data, std::size_t m, std::size_t n) {
  return Eigen::Map<const gimspg::Matrix>(data, static_cast<Eigen::Index>(m),
                                          static_cast<Eigen::Index>(n));
}

// Maps solver keys to fields; shares value parsing with the experiment config.
void apply_solver_key(gimspg::SolverConfig& config, const std::string& key,
                      const std::string& value) {
  static const char* const kSolverKeys[] = {"sigma_exp", "mu0",       "a",
                                            "beta",      "epsilon",   "tol",
                                            "max_iters", "seed",      "kernel_modulus",
                                            "enforce_v_bound"};
  bool known = false;
  for (const char* k : kSolverKeys) known = known || key == k;
  if (!known) gimspg::fail(gimspg::ErrorCode::kConfig, "unknown solver key '" + key + "'");

  gimspg::ExperimentConfig scratch;
  scratch.solver = config;
  if (key == "beta") {
    scratch.set("beta_list", value);
    if (scratch.beta_list.size() != 1) {
      gimspg::fail(gimspg::ErrorCode::kConfig, "beta takes a single value");
    }
    scratch.solver.beta = scratch.beta_list.front();
  } else if (key == "seed") {
    scratch.set("seed", value);
    scratch.solver.seed = scratch.seed;
  } else {
    scratch.set(key, value);
  }
  scratch.solver.validate();
  config = scratch.solver;
}

}  // namespace

extern "C" {

const char* gimspg_version(void) { return "1.0.0"; }

const char* gimspg_last_error(void) { return last_error.c_str(); }

const char* gimspg_status_string(gimspg_status status) {
  switch (status) {
    case GIMSPG_OK: return "ok";
    case GIMSPG_ERR_INVALID_ARGUMENT: return "invalid argument";
    case GIMSPG_ERR_DOMAIN: return "domain error";
    case GIMSPG_ERR_NUMERIC: return "numerical error";
    case GIMSPG_ERR_IO: return "i/o error";
    case GIMSPG_ERR_CONFIG: return "configuration error";
    case GIMSPG_ERR_INTERNAL: return "internal error";
  }
  return "unknown status";
}

gimspg_status gimspg_solver_config_create(gimspg_solver_config** out) {
  return guarded([&] {
    require(out, "out");
    *out = new gimspg_solver_config{};
  });
}

void gimspg_solver_config_destroy(gimspg_solver_config* config) { delete config; }

gimspg_status gimspg_solver_config_set(gimspg_solver_config* config, const char* key,
                                       const char* value) {
  return guarded([&] {
    require(config, "config");
    require(key, "key");
    require(value, "value");
    gimspg::SolverConfig updated = config->value;
    apply_solver_key(updated, key, value);
    config->value = updated;
  });
}

gimspg_status gimspg_solver_config_get(const gimspg_solver_config* config, const char* key,
                                       double* value) {
  return guarded([&] {
    require(config, "config");
    require(key, "key");
    require(value, "value");
    const auto& c = config->value;
    const std::string k = key;
    if (k == "sigma_exp") *value = c.sigma_exp;
    else if (k == "mu0") *value = c.mu0;
    else if (k == "a") *value = c.descent_threshold;
    else if (k == "beta") *value = c.beta;
    else if (k == "epsilon") *value = c.epsilon;
    else if (k == "tol") *value = c.tol;
    else if (k == "max_iters") *value = static_cast<double>(c.max_iters);
    else if (k == "seed") *value = static_cast<double>(c.seed);
    else if (k == "kernel_modulus") *value = c.kernel_modulus;
    else if (k == "enforce_v_bound") *value = c.enforce_v_bound ? 1.0 : 0.0;
    else gimspg::fail(gimspg::ErrorCode::kConfig, "unknown solver key '" + k + "'");
  });
}

gimspg_status gimspg_schedule_params(double beta, double sigma_exp, double lipschitz_scale,
                                     double kernel_modulus, double epsilon, double* alpha,
                                     double* h) {
  return guarded([&] {
    require(alpha, "alpha");
    require(h, "h");
    const auto params =
        gimspg::schedule_params(beta, sigma_exp, lipschitz_scale, kernel_modulus, epsilon);
    *alpha = params.alpha;
    *h = params.h;
  });
}

gimspg_status gimspg_problem_synthetic(size_t m, size_t n, size_t r, double sr,
                                       const gimspg_gmm* noise, double lambda, double v,
                                       uint64_t seed, gimspg_problem** out) {
  return guarded([&] {
    require(out, "out");
    auto problem = gimspg::make_synthetic(static_cast<Eigen::Index>(m),
                                          static_cast<Eigen::Index>(n),
                                          static_cast<Eigen::Index>(r), sr, noise_from(noise),
                                          lambda, seed, v_from(v));
    *out = new gimspg_problem{std::move(problem)};
  });
}

gimspg_status gimspg_problem_from_observations(size_t m, size_t n, size_t count,
                                               const size_t* rows, const size_t* cols,
                                               const double* values, const double* truth,
                                               double lambda, double v, gimspg_problem** out) {
  return guarded([&] {
    require(out, "out");
    if (count > 0) {
      require(rows, "rows");
      require(cols, "cols");
      require(values, "values");
    }
    std::vector<gimspg::Observation> entries(count);
    for (size_t i = 0; i < count; ++i) {
      entries[i] = {static_cast<Eigen::Index>(rows[i]), static_cast<Eigen::Index>(cols[i]),
                    values[i]};
    }
    gimspg::ObservationSet obs(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(n),
                               std::move(entries));
    std::optional<gimspg::Matrix> truth_matrix;
    if (truth != nullptr) truth_matrix = matrix_from(truth, m, n);
    auto problem = gimspg::make_problem(std::move(obs), std::move(truth_matrix), lambda, v_from(v));
    *out = new gimspg_problem{std::move(problem)};
  });
}

gimspg_status gimspg_problem_from_pgm(const char* path, double sr, const gimspg_gmm* noise,
                                      double lambda, double v, uint64_t seed,
                                      gimspg_problem** out) {
  return guarded([&] {
    require(path, "path");
    require(out, "out");
    const gimspg::Matrix image = gimspg::read_pgm(path);
    auto problem = gimspg::make_inpainting(image, sr, noise_from(noise), lambda, seed, v_from(v));
    *out = new gimspg_problem{std::move(problem)};
  });
}

void gimspg_problem_destroy(gimspg_problem* problem) { delete problem; }

gimspg_status gimspg_problem_shape(const gimspg_problem* problem, size_t* m, size_t* n,
                                   size_t* observed) {
  return guarded([&] {
    require(problem, "problem");
    if (m) *m = static_cast<size_t>(problem->value.rows());
    if (n) *n = static_cast<size_t>(problem->value.cols());
    if (observed) *observed = problem->value.obs.size();
  });
}

gimspg_status gimspg_problem_penalty(const gimspg_problem* problem, double* lambda, double* v,
                                     double* lipschitz_f) {
  return guarded([&] {
    require(problem, "problem");
    if (lambda) *lambda = problem->value.penalty.lambda;
    if (v) *v = problem->value.penalty.v;
    if (lipschitz_f) *lipschitz_f = problem->value.constants.lipschitz_f;
  });
}

gimspg_status gimspg_problem_objectives(const gimspg_problem* problem, const double* x,
                                        double* relaxed, double* l0) {
  return guarded([&] {
    require(problem, "problem");
    require(x, "x");
    const auto& p = problem->value;
    const gimspg::Matrix xm =
        matrix_from(x, static_cast<size_t>(p.rows()), static_cast<size_t>(p.cols()));
    if (relaxed) *relaxed = gimspg::objective_relaxed(xm, p);
    if (l0) *l0 = gimspg::objective_l0(xm, p);
  });
}

gimspg_status gimspg_solve(const gimspg_problem* problem, const gimspg_solver_config* config,
                           gimspg_report** out) {
  return guarded([&] {
    require(problem, "problem");
    require(out, "out");
    const gimspg::SolverConfig cfg = config ? config->value : gimspg::SolverConfig{};
    auto report = gimspg::solve(problem->value, cfg);
    *out = new gimspg_report{std::move(report), true};
  });
}

void gimspg_report_destroy(gimspg_report* report) { delete report; }

gimspg_status gimspg_report_summary_get(const gimspg_report* report, gimspg_report_summary* out) {
  return guarded([&] {
    require(report, "report");
    require(out, "out");
    const auto& r = report->value;
    out->iters = r.iters;
    out->wall_time_s = r.wall_time_s;
    out->final_mu = r.final_mu;
    out->final_objective = r.final_objective;
    out->final_rank = r.final_rank;
    out->near_zero_count = r.near_zero_count;
    out->ns_count = r.ns_count;
    out->d_change_count = r.d_change_count;
    out->truncated = r.truncated ? 1 : 0;
    out->stationarity_residual = r.stationarity_residual;
    out->alpha = r.params.alpha;
    out->h = r.params.h;
  });
}

gimspg_status gimspg_report_x_final(const gimspg_report* report, double* buffer,
                                    size_t capacity) {
  return guarded([&] {
    require(report, "report");
    require(buffer, "buffer");
    if (!report->has_iterate) {
      gimspg::fail(gimspg::ErrorCode::kInvalidArgument, "report carries no final iterate");
    }
    const auto& x = report->value.x_final;
    if (capacity < static_cast<size_t>(x.size())) {
      gimspg::fail(gimspg::ErrorCode::kInvalidArgument, "buffer too small for final iterate");
    }
    std::memcpy(buffer, x.data(), static_cast<size_t>(x.size()) * sizeof(double));
  });
}

gimspg_status gimspg_report_metrics(const gimspg_report* report, const gimspg_problem* problem,
                                    double* rmse, double* psnr) {
  return guarded([&] {
    require(report, "report");
    require(problem, "problem");
    if (!report->has_iterate) {
      gimspg::fail(gimspg::ErrorCode::kInvalidArgument, "report carries no final iterate");
    }
    const auto& p = problem->value;
    if (!p.ground_truth) {
      gimspg::fail(gimspg::ErrorCode::kInvalidArgument, "problem has no ground truth");
    }
    if (rmse) *rmse = gimspg::rmse(report->value.x_final, *p.ground_truth);
    if (psnr) *psnr = gimspg::psnr(report->value.x_final, *p.ground_truth);
  });
}

gimspg_status gimspg_report_trace_length(const gimspg_report* report, size_t* length) {
  return guarded([&] {
    require(report, "report");
    require(length, "length");
    *length = report->value.trace.rows.size();
  });
}

gimspg_status gimspg_report_trace_row(const gimspg_report* report, size_t index,
                                      gimspg_trace_row* out) {
  return guarded([&] {
    require(report, "report");
    require(out, "out");
    const auto& rows = report->value.trace.rows;
    if (index >= rows.size()) {
      gimspg::fail(gimspg::ErrorCode::kInvalidArgument, "trace index out of range");
    }
    const auto& row = rows[index];
    *out = gimspg_trace_row{row.k,         row.objective, row.energy,     row.mu,
                            row.step_norm, row.d_changes, row.descent_gap};
  });
}

gimspg_status gimspg_report_export_trace(const gimspg_report* report, const char* path) {
  return guarded([&] {
    require(report, "report");
    require(path, "path");
    gimspg::export_trace(report->value, path);
  });
}

gimspg_status gimspg_report_save(const gimspg_report* report, const char* path) {
  return guarded([&] {
    require(report, "report");
    require(path, "path");
    gimspg::save_report(report->value, path);
  });
}

gimspg_status gimspg_report_load(const char* path, gimspg_report** out) {
  return guarded([&] {
    require(path, "path");
    require(out, "out");
    *out = new gimspg_report{gimspg::load_report(path), false};
  });
}

gimspg_status gimspg_experiment_create(gimspg_experiment** out) {
  return guarded([&] {
    require(out, "out");
    *out = new gimspg_experiment{};
  });
}

void gimspg_experiment_destroy(gimspg_experiment* experiment) { delete experiment; }

gimspg_status gimspg_experiment_load_file(gimspg_experiment* experiment, const char* path) {
  return guarded([&] {
    require(experiment, "experiment");
    require(path, "path");
    gimspg::ExperimentConfig updated = experiment->value;
    updated.load_file(path);
    experiment->value = std::move(updated);
  });
}

size_t gimspg_experiment_key_count(void) { return gimspg::ExperimentConfig::keys().size(); }

const char* gimspg_experiment_key(size_t index) {
  const auto& keys = gimspg::ExperimentConfig::keys();
  return index < keys.size() ? keys[index].c_str() : nullptr;
}

gimspg_status gimspg_experiment_set(gimspg_experiment* experiment, const char* key,
                                    const char* value) {
  return guarded([&] {
    require(experiment, "experiment");
    require(key, "key");
    require(value, "value");
    experiment->value.set(key, value);
  });
}

gimspg_status gimspg_experiment_run(const gimspg_experiment* experiment, size_t* failed_cells,
                                    char* csv_path, size_t path_capacity) {
  return guarded([&] {
    require(experiment, "experiment");
    const auto result = gimspg::run_experiment(experiment->value);
    if (failed_cells) *failed_cells = result.failed_cells;
    if (csv_path && path_capacity > 0) {
      const size_t len = std::min(path_capacity - 1, result.csv_path.size());
      std::memcpy(csv_path, result.csv_path.data(), len);
      csv_path[len] = '\0';
    }
  });
}

}  // extern "C"
