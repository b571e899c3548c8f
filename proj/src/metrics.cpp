#include "gimspg/metrics.hpp"

#include <cmath>

#include "gimspg/error.hpp"
#include "gimspg/spectral.hpp"

namespace gimspg {

namespace {

void check_same_shape(const Matrix& x, const Matrix& m) {
  if (x.rows() != m.rows() || x.cols() != m.cols()) {
    fail(ErrorCode::kInvalidArgument, "metric inputs differ in shape");
  }
  if (x.size() == 0) fail(ErrorCode::kInvalidArgument, "metric inputs are empty");
}

}  // namespace

double rmse(const Matrix& x, const Matrix& m) {
  check_same_shape(x, m);
  return std::sqrt((x - m).squaredNorm() / static_cast<double>(x.size()));
}

double psnr(const Matrix& x, const Matrix& m) {
  check_same_shape(x, m);
  const double err = (x - m).squaredNorm();
  if (err == 0.0) return kPsnrExact;
  return 10.0 * std::log10(static_cast<double>(x.size()) / err);
}

double zero_tolerance(const Vector& sigma) {
  return sigma.size() == 0 ? 0.0 : kZeroTolRelative * sigma.maxCoeff();
}

std::size_t numerical_rank(const Vector& sigma) {
  const double tol = zero_tolerance(sigma);
  std::size_t rank = 0;
  for (Eigen::Index i = 0; i < sigma.size(); ++i) rank += sigma[i] > tol;
  return rank;
}

std::size_t numerical_rank(const Matrix& x) { return numerical_rank(singular_values(x)); }

double objective_relaxed(const Matrix& x, const CompletionProblem& problem) {
  const Vector sigma = singular_values(x);
  return l1_loss(x, problem.obs) +
         problem.penalty.lambda * capped_l1_sum(sigma, problem.penalty.v);
}

double objective_l0(const Matrix& x, const CompletionProblem& problem) {
  return l1_loss(x, problem.obs) +
         problem.penalty.lambda * static_cast<double>(numerical_rank(x));
}

MetricsReport evaluate(const Matrix& x, const CompletionProblem& problem) {
  MetricsReport report;
  report.objective_relaxed = objective_relaxed(x, problem);
  report.objective_l0 = objective_l0(x, problem);
  report.numerical_rank = numerical_rank(x);
  if (problem.ground_truth) {
    report.rmse = rmse(x, *problem.ground_truth);
    report.psnr = psnr(x, *problem.ground_truth);
  } else {
    report.rmse = std::nan("");
    report.psnr = std::nan("");
  }
  return report;
}

}  // namespace gimspg
