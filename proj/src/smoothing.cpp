#include "gimspg/smoothing.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "gimspg/error.hpp"

namespace gimspg {

namespace {

void check_mu(double mu) {
  if (!(mu > 0.0) || !std::isfinite(mu)) {
    fail(ErrorCode::kInvalidArgument, "smoothing parameter mu must be positive");
  }
}

}  // namespace

ObservationSet::ObservationSet(Eigen::Index rows, Eigen::Index cols,
                               std::vector<Observation> entries)
    : rows_(rows), cols_(cols), entries_(std::move(entries)) {
  if (rows <= 0 || cols <= 0) fail(ErrorCode::kInvalidArgument, "empty matrix shape");
  if (rows < cols) {
    fail(ErrorCode::kInvalidArgument, "observation shape must have rows >= cols");
  }
  if (entries_.empty()) fail(ErrorCode::kInvalidArgument, "observation set is empty");
  for (const auto& e : entries_) {
    if (e.row < 0 || e.row >= rows || e.col < 0 || e.col >= cols) {
      std::ostringstream msg;
      msg << "observation index (" << e.row << ", " << e.col << ") out of range";
      fail(ErrorCode::kInvalidArgument, msg.str());
    }
    if (!std::isfinite(e.value)) fail(ErrorCode::kNumeric, "non-finite observed value");
  }
  std::sort(entries_.begin(), entries_.end(), [](const Observation& a, const Observation& b) {
    return a.col != b.col ? a.col < b.col : a.row < b.row;
  });
  auto dup = std::adjacent_find(entries_.begin(), entries_.end(),
                                [](const Observation& a, const Observation& b) {
                                  return a.row == b.row && a.col == b.col;
                                });
  if (dup != entries_.end()) {
    std::ostringstream msg;
    msg << "duplicate observation index (" << dup->row << ", " << dup->col << ")";
    fail(ErrorCode::kInvalidArgument, msg.str());
  }
}

Matrix ObservationSet::project_values() const {
  Matrix out = Matrix::Zero(rows_, cols_);
  for (const auto& e : entries_) out(e.row, e.col) = e.value;
  return out;
}

Matrix ObservationSet::project(const Matrix& x) const {
  check_shape(x);
  Matrix out = Matrix::Zero(rows_, cols_);
  for (const auto& e : entries_) out(e.row, e.col) = x(e.row, e.col);
  return out;
}

Matrix ObservationSet::mask() const {
  Matrix out = Matrix::Zero(rows_, cols_);
  for (const auto& e : entries_) out(e.row, e.col) = 1.0;
  return out;
}

void ObservationSet::check_shape(const Matrix& x) const {
  if (x.rows() != rows_ || x.cols() != cols_) {
    std::ostringstream msg;
    msg << "matrix shape " << x.rows() << "x" << x.cols() << " does not match observation shape "
        << rows_ << "x" << cols_;
    fail(ErrorCode::kInvalidArgument, msg.str());
  }
}

double huber(double s, double mu) {
  check_mu(mu);
  const double a = std::abs(s);
  return a > mu ? a : s * s / (2.0 * mu) + mu / 2.0;
}

double huber_grad(double s, double mu) {
  check_mu(mu);
  if (std::abs(s) > mu) return s > 0.0 ? 1.0 : -1.0;
  return s / mu;
}

LossConstants loss_constants(const ObservationSet& obs) {
  const auto count = static_cast<double>(obs.size());
  // Each Huber term moves by at most |mu1 - mu2| / 2 when mu changes.
  return LossConstants{count / 2.0, 1.0, std::sqrt(count)};
}

double l1_loss(const Matrix& x, const ObservationSet& obs) {
  obs.check_shape(x);
  double total = 0.0;
  for (const auto& e : obs.entries()) total += std::abs(x(e.row, e.col) - e.value);
  return total;
}

double smoothed_loss_value(const Matrix& x, const ObservationSet& obs, double mu) {
  obs.check_shape(x);
  check_mu(mu);
  double total = 0.0;
  for (const auto& e : obs.entries()) total += huber(x(e.row, e.col) - e.value, mu);
  return total;
}

Matrix smoothed_loss_gradient(const Matrix& x, const ObservationSet& obs, double mu) {
  obs.check_shape(x);
  check_mu(mu);
  Matrix g = Matrix::Zero(x.rows(), x.cols());
  for (const auto& e : obs.entries()) g(e.row, e.col) = huber_grad(x(e.row, e.col) - e.value, mu);
  return g;
}

}  // namespace gimspg
