#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "gimspg/penalty.hpp"
#include "gimspg/problems.hpp"
#include "gimspg/smoothing.hpp"

namespace gimspg {

/// Algorithm parameters. Penalty parameters (lambda, v) live on the
/// problem. Defaults are the experimental settings: sigma = 0.9, mu0 = 1,
/// a = 1, beta = 0.4, tol = 1e-4.
struct SolverConfig {
  double sigma_exp = 0.9;          ///< exponent of the mu schedule, in (0, 1)
  double mu0 = 1.0;                ///< initial smoothing parameter
  double descent_threshold = 1.0;  ///< mu is kept when H drops by a * mu^2
  double beta = 0.4;               ///< gradient extrapolation weight in [0, 1]
  double epsilon = 0.01;           ///< descent margin of the parameter constraints
  double tol = 1e-4;               ///< relative step stopping tolerance; 0 disables
  std::size_t max_iters = 5000;
  std::uint64_t seed = 0;          ///< recorded in reports; the solve itself is deterministic
  double kernel_modulus = 1.0;     ///< c of the quadratic Bregman kernel (c/2)||X||^2
  bool enforce_v_bound = true;     ///< reject problems with v >= lambda / L_f

  void validate() const;
};

/// Extrapolation weight alpha and inverse step h, constant across iterations.
struct StepParams {
  double alpha = 0.0;
  double h = 1.0;
};

/// Largest-range choice where both upper bounds on 1/h coincide at the
/// worst-case ratio mu_k / mu_{k+1} = 2^sigma, with a fixed 0.02 slack:
///   alpha = beta (c - 0.02) / (1 + 2^sigma beta),
///   h     = L~ (1 + 2^sigma beta) / (c - 0.02).
/// For c = 1 this is alpha = 0.98 beta / (1 + 2^sigma beta),
/// h = (1 + 2^sigma beta) L~ / 0.98. Throws when the pair violates the
/// constraints for the given epsilon.
StepParams schedule_params(double beta, double sigma_exp, double lipschitz_scale,
                           double kernel_modulus, double epsilon = 0.01);

/// Result of substituting (alpha, h) into the parameter constraints.
struct ConstraintCheck {
  double alpha_upper = 0.0;  ///< (c - 2^sigma eps) / (1 + 2^sigma)
  double inv_h_upper = 0.0;  ///< min of the two bounds on 1/h
  double margin = 0.0;       ///< min(inv_h_upper - 1/h, alpha_upper - alpha)
  bool feasible = false;
};

ConstraintCheck check_step_params(const StepParams& params, double beta, double sigma_exp,
                                  double lipschitz_scale, double kernel_modulus,
                                  double epsilon);

/// Diagnostics of the most recent step.
struct StepInfo {
  double objective = 0.0;    ///< relaxed objective at the new iterate
  double energy = 0.0;       ///< auxiliary energy H after the step
  double step_norm = 0.0;    ///< ||X^{k+1} - X^k||_F
  double rel_step = 0.0;     ///< step_norm / ||X^k||_F
  std::size_t d_changes = 0; ///< entries of d^k differing from d^{k-1}
  bool mu_changed = false;
  /// H_{k+1} - H_k + (eps h / 2) mu_{k+1}^{-1} ||X^{k+1} - X^k||^2; the
  /// energy descent property says this is <= 0.
  double descent_gap = 0.0;
};

struct SolverState {
  Matrix x_prev;
  Matrix x_curr;
  Vector sigma_curr;  ///< spectrum of x_curr
  double mu_prev = 0.0;
  double mu_curr = 0.0;
  double h_prev = 0.0;  ///< auxiliary energy carried into the next test
  DcVector d_curr;      ///< selector used by the last step (empty before the first)
  std::size_t iter = 0;
  std::size_t d_change_count = 0;
  std::size_t ns_count = 0;  ///< number of iterations where mu changed
  StepInfo last;
};

struct IterationRecord {
  std::size_t k = 0;
  double objective = 0.0;
  double energy = 0.0;
  double mu = 0.0;
  double step_norm = 0.0;
  std::size_t d_changes = 0;
  double descent_gap = 0.0;
};

/// Row 0 describes the starting point; row k the iterate after step k.
struct SolverTrace {
  std::vector<IterationRecord> rows;
};

struct SolveReport {
  Matrix x_final;
  std::size_t iters = 0;
  double wall_time_s = 0.0;
  double final_mu = 0.0;
  double final_objective = 0.0;
  std::size_t final_rank = 0;       ///< singular values >= v
  std::size_t near_zero_count = 0;  ///< singular values < zero tolerance
  std::size_t ns_count = 0;
  std::size_t d_change_count = 0;
  bool truncated = false;           ///< max_iters reached before tol
  double stationarity_residual = 0.0;
  StepParams params;
  SolverTrace trace;
};

/// f~(X, mu) + lambda Phi(X), with Phi the capped-l1 spectral penalty.
double smoothed_objective(const Matrix& x, const CompletionProblem& problem, double mu);

/// H = F~(X_next, mu_curr) + kappa mu_curr
///     + (h_next alpha_next / 2) mu_next^{-1} ||X_next - X_curr||^2.
double aux_energy(const Matrix& x_next, const Matrix& x_curr, double mu_next, double mu_curr,
                  double alpha_next, double h_next, const CompletionProblem& problem);

/// X^0 = X^{-1} = P_Omega(M), mu_{-1} = mu_0.
SolverState initial_state(const CompletionProblem& problem, const SolverConfig& config);

/// One iteration with the Euclidean proximal term.
SolverState gimspg_step(const SolverState& state, const CompletionProblem& problem,
                        const SolverConfig& config);

/// One iteration with the quadratic Bregman kernel (c/2)||X||^2,
/// c = config.kernel_modulus.
SolverState bregman_step(const SolverState& state, const CompletionProblem& problem,
                         const SolverConfig& config);

/// Runs until the relative step drops to tol or max_iters is reached.
/// Uses bregman_step when kernel_modulus != 1.
SolveReport solve(const CompletionProblem& problem, const SolverConfig& config);

/// Approximate lifted-stationarity residual: the norm of the diagonal of
/// U^T grad f~(X, mu) V plus the penalty subgradient. Off-diagonal terms
/// are ignored.
double stationarity_residual(const Matrix& x, const CompletionProblem& problem, double mu_eval);

}  // namespace gimspg
