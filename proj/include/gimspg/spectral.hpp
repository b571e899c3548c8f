#pragma once

#include <Eigen/Dense>

#include "gimspg/penalty.hpp"
#include "gimspg/smoothing.hpp"

namespace gimspg {

/// Thin SVD W = U diag(sigma) V^T with U (m x n), V (n x n), sigma sorted
/// nonincreasing.
struct SvdFactors {
  Matrix u;
  Vector sigma;
  Matrix v;

  Matrix reconstruct() const;
};

/// Requires rows >= cols and finite entries.
SvdFactors svd(const Matrix& w);

Vector singular_values(const Matrix& w);

/// Closed-form minimizer of tau * Phi^d(X) + 0.5 * ||X - W||_F^2: the vector
/// prox applied to the spectrum of W. d is paired with the singular values
/// positionally.
Matrix spectral_prox(const Matrix& w, const DcVector& d, double tau, double v);

/// Same as spectral_prox but starting from precomputed factors.
Matrix spectral_prox(const SvdFactors& factors, const DcVector& d, double tau, double v);

}  // namespace gimspg
