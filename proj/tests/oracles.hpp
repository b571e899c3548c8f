#pragma once
// Reference implementations used to check the library. They deliberately
// avoid the library's own helpers (no prox_phi_d, no huber, Jacobi SVD by
// default) so a shared bug cannot hide on both sides.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "gimspg/problems.hpp"

namespace oracle {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// tau * (x/v - theta_d(x)) + 0.5 (x - w)^2 for x >= 0.
inline double scalar_prox_objective(double x, double w, int d, double tau, double v) {
  const double theta = d == 1 ? 0.0 : x / v - 1.0;
  return tau * (x / v - theta) + 0.5 * (x - w) * (x - w);
}

// Brute-force minimizer on a uniform grid over [0, hi].
inline double grid_prox(double w, int d, double tau, double v, double step) {
  const double hi = std::max(0.0, w) + step;
  double best_x = 0.0;
  double best = scalar_prox_objective(0.0, w, d, tau, v);
  const long n = static_cast<long>(std::ceil(hi / step));
  for (long i = 1; i <= n; ++i) {
    const double x = static_cast<double>(i) * step;
    const double f = scalar_prox_objective(x, w, d, tau, v);
    if (f < best) {
      best = f;
      best_x = x;
    }
  }
  return best_x;
}

// min over all 2^n selectors of sum_i (x_i/v - theta_{d_i}(x_i)).
inline double min_over_selectors(const Vector& x, double v) {
  const long n = x.size();
  double best = std::numeric_limits<double>::infinity();
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << n); ++mask) {
    double s = 0.0;
    for (long i = 0; i < n; ++i) {
      const bool capped = (mask >> i) & 1u;
      s += x(i) / v - (capped ? x(i) / v - 1.0 : 0.0);
    }
    best = std::min(best, s);
  }
  return best;
}

// sigma via Jacobi SVD, sorted nonincreasing.
inline Vector jacobi_sigma(const Matrix& x) {
  Eigen::JacobiSVD<Matrix> svd(x);
  return svd.singularValues();
}

// tau * Phi^d(sigma(X)) + 0.5 ||X - W||^2 with d paired positionally.
inline double matrix_prox_objective(const Matrix& x, const Matrix& w,
                                    const std::vector<int>& d, double tau, double v) {
  const Vector s = jacobi_sigma(x);
  double phi = 0.0;
  for (long i = 0; i < s.size(); ++i) phi += d[static_cast<std::size_t>(i)] == 1 ? s(i) / v : 1.0;
  return tau * phi + 0.5 * (x - w).squaredNorm();
}

// Huber-smoothed l1 on the observed entries, written from the definition.
inline double smoothed_l1(const Matrix& x, const gimspg::ObservationSet& obs, double mu) {
  double total = 0.0;
  for (const auto& e : obs.entries()) {
    const double s = x(e.row, e.col) - e.value;
    total += std::abs(s) > mu ? std::abs(s) : s * s / (2.0 * mu) + mu / 2.0;
  }
  return total;
}

inline double l1(const Matrix& x, const gimspg::ObservationSet& obs) {
  double total = 0.0;
  for (const auto& e : obs.entries()) total += std::abs(x(e.row, e.col) - e.value);
  return total;
}

// Central-difference gradient of smoothed_l1.
inline Matrix fd_gradient(const Matrix& x, const gimspg::ObservationSet& obs, double mu,
                          double h) {
  Matrix g = Matrix::Zero(x.rows(), x.cols());
  Matrix xp = x;
  for (long j = 0; j < x.cols(); ++j) {
    for (long i = 0; i < x.rows(); ++i) {
      const double keep = xp(i, j);
      xp(i, j) = keep + h;
      const double fp = smoothed_l1(xp, obs, mu);
      xp(i, j) = keep - h;
      const double fm = smoothed_l1(xp, obs, mu);
      xp(i, j) = keep;
      g(i, j) = (fp - fm) / (2.0 * h);
    }
  }
  return g;
}

inline double capped_sum(const Vector& s, double v) {
  double total = 0.0;
  for (long i = 0; i < s.size(); ++i) total += std::min(1.0, s(i) / v);
  return total;
}

// Independently coded MSPG (beta = 0 special case): proximal gradient on the
// smoothed problem with the descent-tested mu schedule. Uses Jacobi SVD and
// its own selector/prox/energy arithmetic.
struct MspgLoop {
  const gimspg::CompletionProblem& p;
  double mu0 = 1.0;
  double sigma_exp = 0.9;
  double a = 1.0;
  double h = 1.0 / 0.98;
  // Use the divide-and-conquer SVD for the step (matches the library's
  // rounding); Jacobi otherwise.
  bool bdc = false;

  template <class Svd>
  static Matrix shrink(const Matrix& w, const Vector& sx, double tau, double v) {
    Svd svd(w, Eigen::ComputeThinU | Eigen::ComputeThinV);
    Vector s = svd.singularValues();
    for (long i = 0; i < s.size(); ++i) {
      if (sx(i) < v) s(i) = std::max(s(i) - tau / v, 0.0);
    }
    return svd.matrixU() * s.asDiagonal() * svd.matrixV().transpose();
  }

  std::vector<Matrix> run(int iters) const {
    const double lambda = p.penalty.lambda;
    const double v = p.penalty.v;
    const double kappa = static_cast<double>(p.obs.size()) / 2.0;
    Matrix x = Matrix::Zero(p.rows(), p.cols());
    for (const auto& e : p.obs.entries()) x(e.row, e.col) = e.value;
    double mu = mu0;
    double energy = smoothed_l1(x, p.obs, mu) + lambda * capped_sum(jacobi_sigma(x), v) + kappa * mu;
    std::vector<Matrix> out{x};
    for (int k = 0; k < iters; ++k) {
      Matrix g = Matrix::Zero(x.rows(), x.cols());
      for (const auto& e : p.obs.entries()) {
        const double s = x(e.row, e.col) - e.value;
        g(e.row, e.col) = std::abs(s) > mu ? (s > 0 ? 1.0 : -1.0) : s / mu;
      }
      const Vector sx = jacobi_sigma(x);
      const Matrix w = x - (mu / h) * g;
      const double tau = lambda * mu / h;
      const Matrix next = bdc ? shrink<Eigen::BDCSVD<Matrix>>(w, sx, tau, v)
                              : shrink<Eigen::JacobiSVD<Matrix>>(w, sx, tau, v);
      const double f_next =
          smoothed_l1(next, p.obs, mu) + lambda * capped_sum(jacobi_sigma(next), v) + kappa * mu;
      if (!(f_next - energy <= -a * mu * mu)) {
        mu = mu0 / std::pow(static_cast<double>(k + 1), sigma_exp);
      }
      energy = f_next;
      x = next;
      out.push_back(x);
    }
    return out;
  }
};

// Rank-`rank` matrix with entries in [0, 1]: product of uniform factors.
inline Matrix low_rank_image(long rows, long cols, int rank, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  Matrix a(rows, rank), b(cols, rank);
  for (long i = 0; i < rows; ++i)
    for (int k = 0; k < rank; ++k) a(i, k) = unit(gen);
  for (long j = 0; j < cols; ++j)
    for (int k = 0; k < rank; ++k) b(j, k) = unit(gen);
  Matrix img = a * b.transpose() / static_cast<double>(rank);
  return img;
}

}  // namespace oracle
