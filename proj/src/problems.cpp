#include "gimspg/problems.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "gimspg/error.hpp"
#include "gimspg/random.hpp"

namespace gimspg {

namespace {

// Stream ids for the independent random draws of one problem instance.
constexpr std::uint64_t kFactorStream = 1;
constexpr std::uint64_t kMaskStream = 2;
constexpr std::uint64_t kNoiseStream = 3;

}  // namespace

void GmmNoiseParams::validate() const {
  if (!(var_a >= 0.0) || !(var_b >= 0.0)) {
    fail(ErrorCode::kInvalidArgument, "GMM variances must be nonnegative");
  }
  if (var_b < var_a) fail(ErrorCode::kInvalidArgument, "GMM requires var_b >= var_a");
  if (!(c >= 0.0 && c <= 1.0)) fail(ErrorCode::kInvalidArgument, "GMM weight c must lie in [0, 1]");
}

double default_v(double lambda, double lipschitz_f) { return 0.9 * lambda / lipschitz_f; }

CompletionProblem make_problem(ObservationSet obs, std::optional<Matrix> ground_truth,
                               double lambda, std::optional<double> v) {
  if (ground_truth) obs.check_shape(*ground_truth);
  const LossConstants constants = loss_constants(obs);
  CappedL1Params penalty{0.0, lambda};
  penalty.v = (v && *v > 0.0) ? *v : default_v(lambda, constants.lipschitz_f);
  penalty.validate();
  return CompletionProblem{std::move(obs), std::move(ground_truth), penalty, constants, false};
}

Matrix gen_low_rank(Eigen::Index m, Eigen::Index n, Eigen::Index r, std::uint64_t seed) {
  if (r < 1) fail(ErrorCode::kInvalidArgument, "rank must be at least 1");
  if (!(r <= n && n <= m)) {
    fail(ErrorCode::kInvalidArgument, "gen_low_rank requires r <= n <= m");
  }
  Rng rng(seed);
  Matrix left(m, r);
  Matrix right(n, r);
  for (Eigen::Index j = 0; j < r; ++j)
    for (Eigen::Index i = 0; i < m; ++i) left(i, j) = rng.normal();
  for (Eigen::Index j = 0; j < r; ++j)
    for (Eigen::Index i = 0; i < n; ++i) right(i, j) = rng.normal();
  return left * right.transpose();
}

std::vector<Eigen::Index> sample_mask(Eigen::Index m, Eigen::Index n, double sr,
                                      std::uint64_t seed) {
  if (!(sr > 0.0 && sr <= 1.0)) fail(ErrorCode::kInvalidArgument, "sample ratio must lie in (0, 1]");
  if (m <= 0 || n <= 0) fail(ErrorCode::kInvalidArgument, "empty matrix shape");
  const auto total = static_cast<std::uint64_t>(m * n);
  const auto count = static_cast<std::uint64_t>(std::llround(sr * static_cast<double>(total)));
  if (count == 0) fail(ErrorCode::kInvalidArgument, "sample ratio selects no entries");

  // Partial Fisher-Yates shuffle.
  std::vector<Eigen::Index> pool(total);
  std::iota(pool.begin(), pool.end(), Eigen::Index{0});
  Rng rng(seed);
  for (std::uint64_t i = 0; i < count; ++i) {
    const std::uint64_t j = i + rng.below(total - i);
    std::swap(pool[i], pool[j]);
  }
  pool.resize(count);
  std::sort(pool.begin(), pool.end());
  return pool;
}

Matrix gmm_noise(Eigen::Index rows, Eigen::Index cols, const GmmNoiseParams& params,
                 std::uint64_t seed) {
  params.validate();
  const double sd_a = std::sqrt(params.var_a);
  const double sd_b = std::sqrt(params.var_b);
  Rng rng(seed);
  Matrix out(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j) {
    for (Eigen::Index i = 0; i < rows; ++i) {
      const bool outlier = rng.uniform() < params.c;
      out(i, j) = (outlier ? sd_b : sd_a) * rng.normal();
    }
  }
  return out;
}

ObservationSet observe(const Matrix& m, double sr, const std::optional<GmmNoiseParams>& noise,
                       std::uint64_t seed) {
  const auto indices = sample_mask(m.rows(), m.cols(), sr, mix_seed(seed, kMaskStream));
  Matrix corrupted = m;
  if (noise) corrupted += gmm_noise(m.rows(), m.cols(), *noise, mix_seed(seed, kNoiseStream));
  std::vector<Observation> entries;
  entries.reserve(indices.size());
  for (Eigen::Index k : indices) {
    const Eigen::Index row = k % m.rows();
    const Eigen::Index col = k / m.rows();
    entries.push_back({row, col, corrupted(row, col)});
  }
  return ObservationSet(m.rows(), m.cols(), std::move(entries));
}

CompletionProblem make_synthetic(Eigen::Index m, Eigen::Index n, Eigen::Index r, double sr,
                                 const std::optional<GmmNoiseParams>& noise, double lambda,
                                 std::uint64_t seed, std::optional<double> v) {
  Matrix truth = gen_low_rank(m, n, r, mix_seed(seed, kFactorStream));
  ObservationSet obs = observe(truth, sr, noise, seed);
  return make_problem(std::move(obs), std::move(truth), lambda, v);
}

CompletionProblem make_inpainting(const Matrix& image, double sr,
                                  const std::optional<GmmNoiseParams>& noise, double lambda,
                                  std::uint64_t seed, std::optional<double> v) {
  if (image.size() == 0) fail(ErrorCode::kInvalidArgument, "empty image");
  if (!image.allFinite() || image.minCoeff() < 0.0 || image.maxCoeff() > 1.0) {
    fail(ErrorCode::kDomain, "image pixels must lie in [0, 1]");
  }
  const bool wide = image.rows() < image.cols();
  Matrix data = wide ? Matrix(image.transpose()) : image;
  ObservationSet obs = observe(data, sr, noise, seed);
  CompletionProblem problem = make_problem(std::move(obs), std::move(data), lambda, v);
  problem.transposed = wide;
  return problem;
}

}  // namespace gimspg
