#include "gimspg/spectral.hpp"

#include "gimspg/error.hpp"

namespace gimspg {

namespace {

void check_input(const Matrix& w) {
  if (w.rows() < w.cols()) fail(ErrorCode::kInvalidArgument, "svd requires rows >= cols");
  if (!w.allFinite()) fail(ErrorCode::kNumeric, "svd input has non-finite entries");
}

}  // namespace

Matrix SvdFactors::reconstruct() const { return u * sigma.asDiagonal() * v.transpose(); }

SvdFactors svd(const Matrix& w) {
  check_input(w);
  Eigen::BDCSVD<Matrix> dec(w, Eigen::ComputeThinU | Eigen::ComputeThinV);
  return SvdFactors{dec.matrixU(), dec.singularValues(), dec.matrixV()};
}

Vector singular_values(const Matrix& w) {
  check_input(w);
  Eigen::BDCSVD<Matrix> dec(w);
  return dec.singularValues();
}

Matrix spectral_prox(const SvdFactors& factors, const DcVector& d, double tau, double v) {
  const Vector shrunk = prox_phi_d(factors.sigma, d, tau, v);
  return factors.u * shrunk.asDiagonal() * factors.v.transpose();
}

Matrix spectral_prox(const Matrix& w, const DcVector& d, double tau, double v) {
  return spectral_prox(svd(w), d, tau, v);
}

}  // namespace gimspg
