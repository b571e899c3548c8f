#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "gimspg/error.hpp"
#include "gimspg/metrics.hpp"
#include "gimspg/solver.hpp"
#include "oracles.hpp"

using namespace gimspg;

namespace {

// A noiseless instance where the default v is large enough for the solver
// to move away from P_Omega(M).
CompletionProblem active_problem(std::uint64_t seed = 7) {
  return make_synthetic(60, 40, 5, 0.6, std::nullopt, 400.0, seed);
}

}  // namespace

TEST_CASE("schedule_params closed form") {
  const double r = std::pow(2.0, 0.9);
  const auto p = schedule_params(0.4, 0.9, 1.0, 1.0);
  CHECK(p.alpha == doctest::Approx(0.98 * 0.4 / (1.0 + r * 0.4)).epsilon(1e-14));
  CHECK(p.h == doctest::Approx((1.0 + r * 0.4) / 0.98).epsilon(1e-14));
  CHECK(p.alpha == doctest::Approx(0.22446).epsilon(1e-4));
  CHECK(p.h == doctest::Approx(1.78207).epsilon(1e-4));

  const auto mspg = schedule_params(0.0, 0.9, 1.0, 1.0);
  CHECK(mspg.alpha == 0.0);
  CHECK(mspg.h == doctest::Approx(1.0 / 0.98));

  const auto scaled = schedule_params(0.4, 0.9, 3.0, 1.0);
  CHECK(scaled.h == doctest::Approx(3.0 * p.h));
}

TEST_CASE("schedule_params satisfies the parameter constraints") {
  for (double beta : {0.0, 0.1, 0.3, 0.4, 0.7, 1.0}) {
    for (double sigma : {0.1, 0.5, 0.9}) {
      const auto p = schedule_params(beta, sigma, 1.0, 1.0);
      const auto check = check_step_params(p, beta, sigma, 1.0, 1.0, 0.01);
      CHECK(check.feasible);
      CHECK(check.margin >= 0.0);
      // independent substitution with ratio 2^sigma
      const double r = std::pow(2.0, sigma);
      CHECK(p.alpha < (1.0 - r * 0.01) / (1.0 + r));
      const double b1 = (1.0 - p.alpha - (p.alpha + 0.01) * r) / (1.0 - beta);
      CHECK(1.0 / p.h <= (beta < 1.0 ? b1 : 1e300) + 1e-12);
      if (beta > 0) CHECK(1.0 / p.h <= p.alpha / beta + 1e-12);
    }
  }
  // eps so large that 2^sigma * eps exceeds the slack
  CHECK_THROWS_AS(schedule_params(0.4, 0.9, 1.0, 1.0, 0.02), Error);
}

TEST_CASE("strongly convex kernel admits large beta") {
  const double c = 1.0 + std::pow(2.0, 0.9);
  const auto p = schedule_params(0.9, 0.9, 1.0, c);
  CHECK(check_step_params(p, 0.9, 0.9, 1.0, c, 0.01).feasible);
  CHECK(p.alpha > 0.0);
  CHECK(p.alpha < 1.0);
}

TEST_CASE("aux_energy bookkeeping") {
  const auto problem = active_problem();
  const Matrix x0 = problem.obs.project_values();
  Matrix x1 = x0;
  x1(0, 0) += 0.5;
  const double mu = 0.3;
  const double lambda = problem.penalty.lambda;
  const double v = problem.penalty.v;
  const double kappa = problem.obs.size() / 2.0;
  const double f1 = oracle::smoothed_l1(x1, problem.obs, mu) +
                    lambda * oracle::capped_sum(oracle::jacobi_sigma(x1), v);

  CHECK(aux_energy(x1, x1, mu, mu, 0.2, 1.5, problem) ==
        doctest::Approx(f1 + kappa * mu).epsilon(1e-12));
  CHECK(aux_energy(x1, x0, 0.1, mu, 0.0, 1.5, problem) ==
        doctest::Approx(f1 + kappa * mu).epsilon(1e-12));
  CHECK(aux_energy(x1, x0, 0.1, mu, 0.2, 1.5, problem) ==
        doctest::Approx(f1 + kappa * mu + 1.5 * 0.2 / 2.0 / 0.1 * 0.25).epsilon(1e-12));
  CHECK(smoothed_objective(x1, problem, mu) == doctest::Approx(f1).epsilon(1e-12));
}

TEST_CASE("initial state") {
  const auto problem = active_problem();
  const auto s = initial_state(problem, SolverConfig{});
  CHECK(s.x_curr == problem.obs.project_values());
  CHECK(s.x_prev == s.x_curr);
  CHECK(s.mu_curr == 1.0);
  CHECK(s.iter == 0);
  CHECK(s.h_prev == doctest::Approx(smoothed_objective(s.x_curr, problem, 1.0) +
                                    problem.constants.kappa));
}

TEST_CASE("v bound is enforced at solve start") {
  auto problem = make_synthetic(20, 10, 2, 0.5, std::nullopt, 1.0, 1,
                                1.0 / std::sqrt(100.0) * 1.5);
  try {
    initial_state(problem, SolverConfig{});
    FAIL("expected a domain error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kDomain);
  }
  SolverConfig relaxed;
  relaxed.enforce_v_bound = false;
  CHECK_NOTHROW(initial_state(problem, relaxed));
}

TEST_CASE("forced schedule branch sets mu_{k+1} = mu0 / (k+1)^sigma") {
  const auto problem = active_problem();
  SolverConfig config;
  config.descent_threshold = 1e12;  // descent test always fails
  auto s = initial_state(problem, config);
  for (int k = 0; k < 4; ++k) s = gimspg_step(s, problem, config);
  CHECK(s.iter == 4);
  CHECK(s.mu_curr == doctest::Approx(std::pow(4.0, -0.9)).epsilon(1e-14));
  CHECK(s.mu_curr == doctest::Approx(0.28717).epsilon(1e-4));
  // mu_1 = mu0 / 1^sigma does not change mu, so only three real changes
  CHECK(s.ns_count == 3);
}

TEST_CASE("beta = 0 matches an independently coded MSPG loop") {
  const auto problem = active_problem();
  SolverConfig config;
  config.beta = 0.0;
  auto s = initial_state(problem, config);
  const auto ref = oracle::MspgLoop{problem}.run(50);
  for (int k = 1; k <= 50; ++k) {
    s = gimspg_step(s, problem, config);
    const double err = (s.x_curr - ref[static_cast<std::size_t>(k)]).norm();
    REQUIRE(err <= 1e-9 * std::max(1.0, ref[static_cast<std::size_t>(k)].norm()));
  }
}

TEST_CASE("Bregman step with unit modulus equals the Euclidean step") {
  const auto problem = active_problem(8);
  SolverConfig config;
  auto a = initial_state(problem, config);
  auto b = a;
  for (int k = 0; k < 30; ++k) {
    a = gimspg_step(a, problem, config);
    b = bregman_step(b, problem, config);
    REQUIRE((a.x_curr - b.x_curr).norm() <= 1e-12 * std::max(1.0, a.x_curr.norm()));
    REQUIRE(a.mu_curr == b.mu_curr);
  }
}

TEST_CASE("Bregman solve with a larger modulus converges") {
  const auto problem = active_problem(9);
  SolverConfig config;
  config.kernel_modulus = 1.0 + std::pow(2.0, 0.9);
  config.beta = 0.9;
  const auto report = solve(problem, config);
  CHECK(report.iters > 1);
  CHECK(std::isfinite(report.final_objective));
}

TEST_CASE("MSPG energy is nonincreasing on an active run") {
  const auto problem = active_problem();
  SolverConfig config;
  config.beta = 0.0;
  const auto report = solve(problem, config);
  REQUIRE(report.iters > 20);
  for (std::size_t k = 1; k < report.trace.rows.size(); ++k) {
    CHECK(report.trace.rows[k].descent_gap <= 1e-9);
  }
}

TEST_CASE("GIMSPG energy increases only where the mu ratio exceeds 2^sigma") {
  // The schedule mu0/(k+1)^sigma can drop mu by far more than 2^sigma after
  // a long constant stretch; the descent bound is only guaranteed below it.
  const auto problem = active_problem();
  const auto report = solve(problem, SolverConfig{});
  REQUIRE(report.iters > 20);
  const double bound = std::pow(2.0, 0.9);
  const auto& rows = report.trace.rows;
  for (std::size_t k = 1; k < rows.size(); ++k) {
    const double ratio = rows[k - 1].mu / rows[k].mu;
    if (ratio <= bound) CHECK(rows[k].descent_gap <= 1e-9);
  }
}

TEST_CASE("solve report consistency") {
  const auto problem = active_problem();
  const auto report = solve(problem, SolverConfig{});
  CHECK(!report.truncated);
  CHECK(report.trace.rows.size() == report.iters + 1);
  CHECK(report.trace.rows.back().mu == report.final_mu);
  CHECK(report.final_objective ==
        doctest::Approx(objective_relaxed(report.x_final, problem)).epsilon(1e-12));
  CHECK(std::abs(report.trace.rows.back().objective - report.final_objective) <= 1e-10 *
        std::max(1.0, report.final_objective));
  for (std::size_t k = 1; k < report.trace.rows.size(); ++k) {
    CHECK(report.trace.rows[k].mu <= report.trace.rows[k - 1].mu);
  }
  const Vector s = oracle::jacobi_sigma(report.x_final);
  std::size_t above = 0;
  for (long i = 0; i < s.size(); ++i) above += s(i) >= problem.penalty.v ? 1 : 0;
  CHECK(report.final_rank == above);
  CHECK(std::isfinite(report.stationarity_residual));
  CHECK(report.wall_time_s >= 0.0);
}

TEST_CASE("tol = 0 runs to max_iters and flags truncation") {
  const auto problem = active_problem();
  SolverConfig config;
  config.tol = 0.0;
  config.max_iters = 7;
  const auto report = solve(problem, config);
  CHECK(report.iters == 7);
  CHECK(report.truncated);
}

TEST_CASE("config validation") {
  SolverConfig c;
  CHECK_NOTHROW(c.validate());
  auto bad = [](auto mutate) {
    SolverConfig cfg;
    mutate(cfg);
    CHECK_THROWS_AS(cfg.validate(), Error);
  };
  bad([](SolverConfig& x) { x.sigma_exp = 1.0; });
  bad([](SolverConfig& x) { x.mu0 = 0.0; });
  bad([](SolverConfig& x) { x.beta = 1.5; });
  bad([](SolverConfig& x) { x.max_iters = 0; });
  bad([](SolverConfig& x) { x.kernel_modulus = 0.5; });
  bad([](SolverConfig& x) { x.descent_threshold = 0.0; });
}

TEST_CASE("stationarity residual is small at an exact low-rank fit") {
  // X = M observed exactly with singular values all >= v: the loss gradient
  // vanishes and the capped branch has zero subgradient.
  Matrix m = Matrix::Zero(4, 3);
  m(0, 0) = 10.0;
  m(1, 1) = 8.0;
  std::vector<Observation> obs;
  for (long j = 0; j < 3; ++j)
    for (long i = 0; i < 4; ++i) obs.push_back({i, j, m(i, j)});
  auto problem = make_problem(ObservationSet(4, 3, obs), m, 10.0, 1.0);
  CHECK(stationarity_residual(m, problem, 1e-3) <= 1e-10);
}
