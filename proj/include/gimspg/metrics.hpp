#pragma once

#include <limits>

#include "gimspg/problems.hpp"

namespace gimspg {

/// PSNR reported for an exact match.
inline constexpr double kPsnrExact = std::numeric_limits<double>::infinity();
/// Cap applied when a PSNR must enter numeric aggregation.
inline constexpr double kPsnrCap = 200.0;

/// Relative threshold for classifying singular values as zero.
inline constexpr double kZeroTolRelative = 1e-8;

double rmse(const Matrix& x, const Matrix& m);
/// 10 log10(mn / ||X - M||_F^2), assuming unit dynamic range.
double psnr(const Matrix& x, const Matrix& m);

/// kZeroTolRelative * sigma_max, from a precomputed spectrum.
double zero_tolerance(const Vector& sigma);
std::size_t numerical_rank(const Vector& sigma);
std::size_t numerical_rank(const Matrix& x);

/// ||P_Omega(X - M)||_1 + lambda * sum_i min{1, sigma_i / v}.
double objective_relaxed(const Matrix& x, const CompletionProblem& problem);
/// ||P_Omega(X - M)||_1 + lambda * rank(X).
double objective_l0(const Matrix& x, const CompletionProblem& problem);

struct MetricsReport {
  double rmse = 0.0;  ///< NaN when the problem has no ground truth
  double psnr = 0.0;  ///< NaN when the problem has no ground truth
  double objective_relaxed = 0.0;
  double objective_l0 = 0.0;
  std::size_t numerical_rank = 0;
};

MetricsReport evaluate(const Matrix& x, const CompletionProblem& problem);

}  // namespace gimspg
