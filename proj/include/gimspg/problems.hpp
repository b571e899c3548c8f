#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "gimspg/penalty.hpp"
#include "gimspg/smoothing.hpp"

namespace gimspg {

/// Two-component Gaussian mixture: N(0, var_a) w.p. 1 - c, N(0, var_b) w.p. c.
struct GmmNoiseParams {
  double var_a = 0.0001;
  double var_b = 0.1;
  double c = 0.1;

  void validate() const;
  double mixture_variance() const { return (1.0 - c) * var_a + c * var_b; }
};

/// A masked l1 completion problem with its capped-l1 penalty.
struct CompletionProblem {
  ObservationSet obs;
  std::optional<Matrix> ground_truth;
  CappedL1Params penalty;
  LossConstants constants;
  /// Set when the source data had more columns than rows and was stored
  /// transposed to satisfy rows >= cols.
  bool transposed = false;

  Eigen::Index rows() const { return obs.rows(); }
  Eigen::Index cols() const { return obs.cols(); }
  /// Converts a solution back to the orientation of the source data.
  Matrix to_source_orientation(const Matrix& x) const {
    return transposed ? Matrix(x.transpose()) : x;
  }
};

/// Default capping threshold 0.9 * lambda / L_f.
double default_v(double lambda, double lipschitz_f);

/// Builds a problem; a nonpositive or absent v selects default_v.
CompletionProblem make_problem(ObservationSet obs, std::optional<Matrix> ground_truth,
                               double lambda, std::optional<double> v);

/// M = M_L M_R^T with i.i.d. standard normal factors. Requires 1 <= r <= n <= m.
Matrix gen_low_rank(Eigen::Index m, Eigen::Index n, Eigen::Index r, std::uint64_t seed);

/// round(sr * m * n) distinct indices drawn uniformly, returned in
/// column-major linear order.
std::vector<Eigen::Index> sample_mask(Eigen::Index m, Eigen::Index n, double sr,
                                      std::uint64_t seed);

Matrix gmm_noise(Eigen::Index rows, Eigen::Index cols, const GmmNoiseParams& params,
                 std::uint64_t seed);

/// Observes (M + noise) on a uniform mask. Noise is drawn only where observed.
ObservationSet observe(const Matrix& m, double sr, const std::optional<GmmNoiseParams>& noise,
                       std::uint64_t seed);

CompletionProblem make_synthetic(Eigen::Index m, Eigen::Index n, Eigen::Index r, double sr,
                                 const std::optional<GmmNoiseParams>& noise, double lambda,
                                 std::uint64_t seed, std::optional<double> v = std::nullopt);

/// Grayscale image with entries in [0, 1]. Wide images are transposed.
CompletionProblem make_inpainting(const Matrix& image, double sr,
                                  const std::optional<GmmNoiseParams>& noise, double lambda,
                                  std::uint64_t seed, std::optional<double> v = std::nullopt);

}  // namespace gimspg
