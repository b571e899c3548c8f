#include "gimspg/solver.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <sstream>

#include "gimspg/error.hpp"
#include "gimspg/metrics.hpp"
#include "gimspg/spectral.hpp"

namespace gimspg {

namespace {

// Slack 1 - 0.98 in the largest-range step parameters.
constexpr double kStepSlack = 0.02;

enum class Proximal { kEuclidean, kBregman };

double worst_ratio(double sigma_exp) { return std::pow(2.0, sigma_exp); }

void validate_for(const CompletionProblem& problem, const SolverConfig& config) {
  config.validate();
  problem.penalty.validate();
  if (config.enforce_v_bound) problem.penalty.validate_against(problem.constants.lipschitz_f);
}

// Pair the parameters with a validated configuration.
StepParams params_for(const CompletionProblem& problem, const SolverConfig& config) {
  return schedule_params(config.beta, config.sigma_exp, problem.constants.lipschitz_scale,
                         config.kernel_modulus, config.epsilon);
}

SolverState advance(const SolverState& state, const CompletionProblem& problem,
                    const SolverConfig& config, Proximal kind) {
  const StepParams params = params_for(problem, config);
  const double lambda = problem.penalty.lambda;
  const double v = problem.penalty.v;
  const double kappa = problem.constants.kappa;
  const double mu = state.mu_curr;
  const double step = mu / params.h;

  // Step 1: piece selector from the current spectrum.
  DcVector d = dc_select(state.sigma_curr, v);

  // Step 2: extrapolate and solve the subproblem through the spectral prox.
  const Matrix delta = state.x_curr - state.x_prev;
  const Matrix y = state.x_curr + params.alpha * delta;
  const Matrix z = state.x_curr + config.beta * delta;
  const Matrix grad = smoothed_loss_gradient(z, problem.obs, mu);

  Matrix w;
  double tau = 0.0;
  if (kind == Proximal::kEuclidean) {
    w = y - step * grad;
    tau = lambda * step;
  } else {
    // argmin <X, g - (h/mu)(Y - X^k)> + (h/mu)(c/2)||X - X^k||^2 + lambda Phi^d(X).
    const double c = config.kernel_modulus;
    w = state.x_curr + (y - state.x_curr) / c - (step / c) * grad;
    tau = lambda * step / c;
  }
  const SvdFactors factors = svd(w);
  Matrix x_next = spectral_prox(factors, d, tau, v);
  if (!x_next.allFinite()) fail(ErrorCode::kNumeric, "iterate became non-finite");

  // Step 3: energy test deciding the next smoothing parameter.
  Vector sigma_next = singular_values(x_next);
  const double penalty = lambda * capped_l1_sum(sigma_next, v);
  const double smoothed = smoothed_loss_value(x_next, problem.obs, mu) + penalty;
  const double step_sq = (x_next - state.x_curr).squaredNorm();
  const double inertia = params.h * params.alpha / 2.0 * step_sq;

  double mu_next = mu;
  double energy = smoothed + kappa * mu + inertia / mu;
  if (!(energy - state.h_prev <= -config.descent_threshold * mu * mu)) {
    const double k1 = static_cast<double>(state.iter + 1);
    mu_next = config.mu0 / std::pow(k1, config.sigma_exp);
    energy = smoothed + kappa * mu + inertia / mu_next;
  }
  if (!std::isfinite(energy)) fail(ErrorCode::kNumeric, "auxiliary energy became non-finite");

  SolverState next;
  next.last.objective = l1_loss(x_next, problem.obs) + penalty;
  next.last.energy = energy;
  next.last.step_norm = std::sqrt(step_sq);
  const double base = state.x_curr.norm();
  next.last.rel_step = base > 0.0 ? next.last.step_norm / base
                                  : (step_sq == 0.0 ? 0.0 : std::numeric_limits<double>::infinity());
  next.last.d_changes = state.d_curr.size() == d.size() ? d.count_changes(state.d_curr) : 0;
  next.last.mu_changed = mu_next != mu;
  next.last.descent_gap =
      energy - state.h_prev + config.epsilon * params.h / 2.0 / mu_next * step_sq;

  next.x_prev = state.x_curr;
  next.x_curr = std::move(x_next);
  next.sigma_curr = std::move(sigma_next);
  next.mu_prev = mu;
  next.mu_curr = mu_next;
  next.h_prev = energy;
  next.d_curr = std::move(d);
  next.iter = state.iter + 1;
  next.d_change_count = state.d_change_count + next.last.d_changes;
  next.ns_count = state.ns_count + (next.last.mu_changed ? 1 : 0);
  return next;
}

IterationRecord record_of(const SolverState& state) {
  return IterationRecord{state.iter,          state.last.objective, state.h_prev,
                         state.mu_curr,       state.last.step_norm, state.last.d_changes,
                         state.last.descent_gap};
}

}  // namespace

void SolverConfig::validate() const {
  auto reject = [](const char* what) { fail(ErrorCode::kConfig, what); };
  if (!(sigma_exp > 0.0 && sigma_exp < 1.0)) reject("sigma_exp must lie in (0, 1)");
  if (!(mu0 > 0.0) || !std::isfinite(mu0)) reject("mu0 must be positive");
  if (!(descent_threshold > 0.0)) reject("descent threshold a must be positive");
  if (!(beta >= 0.0 && beta <= 1.0)) reject("beta must lie in [0, 1]");
  if (!(epsilon > 0.0 && epsilon < 1.0)) reject("epsilon must lie in (0, 1)");
  if (!(tol >= 0.0)) reject("tol must be nonnegative");
  if (max_iters == 0) reject("max_iters must be positive");
  if (!(kernel_modulus >= 1.0) || !std::isfinite(kernel_modulus)) {
    reject("kernel_modulus must be >= 1");
  }
}

ConstraintCheck check_step_params(const StepParams& params, double beta, double sigma_exp,
                                  double lipschitz_scale, double kernel_modulus,
                                  double epsilon) {
  const double ratio = worst_ratio(sigma_exp);
  const double inf = std::numeric_limits<double>::infinity();
  const double a = params.alpha;
  const double inv_h = 1.0 / params.h;

  ConstraintCheck check;
  check.alpha_upper = (kernel_modulus - ratio * epsilon) / (1.0 + ratio);
  const double numer = kernel_modulus - a - (a + epsilon) * ratio;
  double bound_energy = inf;
  if (beta < 1.0) {
    bound_energy = numer / ((1.0 - beta) * lipschitz_scale);
  } else if (numer < 0.0) {
    bound_energy = -inf;
  }
  const double bound_inertia = beta > 0.0 ? a / (beta * lipschitz_scale) : inf;
  check.inv_h_upper = std::min(bound_energy, bound_inertia);

  const double energy_margin = bound_energy - inv_h;
  const double alpha_margin = check.alpha_upper - a;
  check.margin = std::min(energy_margin, alpha_margin);
  // The inertia bound is met with equality by construction.
  const bool inertia_ok = inv_h <= bound_inertia * (1.0 + 1e-12);
  check.feasible = a >= 0.0 && check.margin > 0.0 && inertia_ok;
  return check;
}

StepParams schedule_params(double beta, double sigma_exp, double lipschitz_scale,
                           double kernel_modulus, double epsilon) {
  if (!(beta >= 0.0 && beta <= 1.0)) fail(ErrorCode::kConfig, "beta must lie in [0, 1]");
  if (!(sigma_exp > 0.0 && sigma_exp < 1.0)) fail(ErrorCode::kConfig, "sigma_exp must lie in (0, 1)");
  if (!(lipschitz_scale > 0.0)) fail(ErrorCode::kConfig, "lipschitz_scale must be positive");
  if (!(kernel_modulus >= 1.0)) fail(ErrorCode::kConfig, "kernel_modulus must be >= 1");

  const double ratio = worst_ratio(sigma_exp);
  const double numer = kernel_modulus - kStepSlack;
  StepParams params;
  params.alpha = numer * beta / (1.0 + ratio * beta);
  params.h = (1.0 + ratio * beta) * lipschitz_scale / numer;

  const ConstraintCheck check =
      check_step_params(params, beta, sigma_exp, lipschitz_scale, kernel_modulus, epsilon);
  if (!check.feasible) {
    std::ostringstream msg;
    msg << "parameters beta = " << beta << ", sigma = " << sigma_exp << ", epsilon = " << epsilon
        << ", kernel_modulus = " << kernel_modulus << " give alpha = " << params.alpha
        << ", 1/h = " << 1.0 / params.h << " violating the step constraints (bound on 1/h "
        << check.inv_h_upper << ", bound on alpha " << check.alpha_upper
        << "); epsilon must satisfy 2^sigma * epsilon < " << kStepSlack;
    fail(ErrorCode::kConfig, msg.str());
  }
  return params;
}

double smoothed_objective(const Matrix& x, const CompletionProblem& problem, double mu) {
  return smoothed_loss_value(x, problem.obs, mu) +
         problem.penalty.lambda * capped_l1_sum(singular_values(x), problem.penalty.v);
}

double aux_energy(const Matrix& x_next, const Matrix& x_curr, double mu_next, double mu_curr,
                  double alpha_next, double h_next, const CompletionProblem& problem) {
  return smoothed_objective(x_next, problem, mu_curr) + problem.constants.kappa * mu_curr +
         h_next * alpha_next / 2.0 / mu_next * (x_next - x_curr).squaredNorm();
}

SolverState initial_state(const CompletionProblem& problem, const SolverConfig& config) {
  validate_for(problem, config);
  SolverState state;
  state.x_curr = problem.obs.project_values();
  state.x_prev = state.x_curr;
  state.sigma_curr = singular_values(state.x_curr);
  state.mu_prev = config.mu0;
  state.mu_curr = config.mu0;
  state.h_prev = smoothed_loss_value(state.x_curr, problem.obs, config.mu0) +
                 problem.penalty.lambda * capped_l1_sum(state.sigma_curr, problem.penalty.v) +
                 problem.constants.kappa * config.mu0;
  state.last.objective =
      l1_loss(state.x_curr, problem.obs) +
      problem.penalty.lambda * capped_l1_sum(state.sigma_curr, problem.penalty.v);
  state.last.energy = state.h_prev;
  return state;
}

SolverState gimspg_step(const SolverState& state, const CompletionProblem& problem,
                        const SolverConfig& config) {
  return advance(state, problem, config, Proximal::kEuclidean);
}

SolverState bregman_step(const SolverState& state, const CompletionProblem& problem,
                         const SolverConfig& config) {
  return advance(state, problem, config, Proximal::kBregman);
}

SolveReport solve(const CompletionProblem& problem, const SolverConfig& config) {
  SolverState state = initial_state(problem, config);
  const bool bregman = config.kernel_modulus != 1.0;

  SolveReport report;
  report.params = params_for(problem, config);
  report.trace.rows.push_back(record_of(state));

  const auto start = std::chrono::steady_clock::now();
  bool converged = false;
  while (state.iter < config.max_iters) {
    state = bregman ? bregman_step(state, problem, config) : gimspg_step(state, problem, config);
    report.trace.rows.push_back(record_of(state));
    if (state.last.rel_step <= config.tol) {
      converged = true;
      break;
    }
  }
  report.wall_time_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  report.iters = state.iter;
  report.truncated = !converged;
  report.final_mu = state.mu_curr;
  report.ns_count = state.ns_count;
  report.d_change_count = state.d_change_count;
  report.final_objective = objective_relaxed(state.x_curr, problem);
  const double zero_tol = zero_tolerance(state.sigma_curr);
  for (Eigen::Index i = 0; i < state.sigma_curr.size(); ++i) {
    const double s = state.sigma_curr[i];
    report.final_rank += s >= problem.penalty.v;
    report.near_zero_count += s < zero_tol || s == 0.0;
  }
  report.stationarity_residual = stationarity_residual(state.x_curr, problem, state.mu_curr);
  report.x_final = std::move(state.x_curr);
  return report;
}

double stationarity_residual(const Matrix& x, const CompletionProblem& problem, double mu_eval) {
  const double lambda = problem.penalty.lambda;
  const double v = problem.penalty.v;
  const SvdFactors factors = svd(x);
  const DcVector d = dc_select(factors.sigma, v);
  const Matrix grad = smoothed_loss_gradient(x, problem.obs, mu_eval);
  const Vector diag = (factors.u.transpose() * grad * factors.v).diagonal();
  const double zero_tol = zero_tolerance(factors.sigma);

  double total = 0.0;
  for (Eigen::Index i = 0; i < diag.size(); ++i) {
    const double base = diag[i] - lambda * dc_piece_slope(d[static_cast<std::size_t>(i)], v);
    double s = 1.0;
    if (!(factors.sigma[i] > zero_tol)) s = std::clamp(-base / (lambda / v), -1.0, 1.0);
    const double r = base + lambda / v * s;
    total += r * r;
  }
  return std::sqrt(total);
}

}  // namespace gimspg
