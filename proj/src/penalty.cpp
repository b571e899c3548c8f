#include "gimspg/penalty.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "gimspg/error.hpp"

namespace gimspg {

namespace {

void check_v(double v) {
  if (!(v > 0.0) || !std::isfinite(v)) {
    fail(ErrorCode::kInvalidArgument, "capping threshold v must be positive");
  }
}

void check_branch(int branch) {
  if (branch != 1 && branch != 2) {
    fail(ErrorCode::kInvalidArgument, "DC branch must be 1 or 2");
  }
}

void check_sizes(std::size_t a, std::size_t b) {
  if (a != b) {
    std::ostringstream msg;
    msg << "selector length " << b << " does not match vector length " << a;
    fail(ErrorCode::kInvalidArgument, msg.str());
  }
}

}  // namespace

void CappedL1Params::validate() const {
  check_v(v);
  if (!(lambda > 0.0) || !std::isfinite(lambda)) {
    fail(ErrorCode::kInvalidArgument, "lambda must be positive");
  }
}

void CappedL1Params::validate_against(double lipschitz_f) const {
  validate();
  if (lipschitz_f > 0.0 && !(v < lambda / lipschitz_f)) {
    std::ostringstream msg;
    msg << "v = " << v << " violates v < lambda / L_f = " << lambda / lipschitz_f;
    fail(ErrorCode::kDomain, msg.str());
  }
}

DcVector::DcVector(std::vector<std::uint8_t> entries) : entries_(std::move(entries)) {
  for (auto e : entries_) check_branch(e);
}

DcVector::DcVector(std::initializer_list<int> entries) {
  entries_.reserve(entries.size());
  for (int e : entries) {
    check_branch(e);
    entries_.push_back(static_cast<std::uint8_t>(e));
  }
}

std::size_t DcVector::count_changes(const DcVector& other) const {
  check_sizes(size(), other.size());
  std::size_t changes = 0;
  for (std::size_t i = 0; i < size(); ++i) changes += entries_[i] != other.entries_[i];
  return changes;
}

DcVector DcVector::from_bits(std::uint64_t mask, std::size_t n) {
  std::vector<std::uint8_t> e(n);
  for (std::size_t i = 0; i < n; ++i) e[i] = static_cast<std::uint8_t>(1 + ((mask >> i) & 1u));
  return DcVector(std::move(e));
}

double capped_l1(double t, double v) {
  check_v(v);
  if (t < 0.0) fail(ErrorCode::kDomain, "capped_l1 argument must be nonnegative");
  return std::min(1.0, t / v);
}

double dc_piece(double t, int branch, double v) {
  check_v(v);
  check_branch(branch);
  if (t < 0.0) fail(ErrorCode::kDomain, "dc_piece argument must be nonnegative");
  return branch == 1 ? 0.0 : t / v - 1.0;
}

double dc_piece_slope(int branch, double v) {
  check_v(v);
  check_branch(branch);
  return branch == 1 ? 0.0 : 1.0 / v;
}

DcVector dc_select(const Vector& sigma, double v) {
  check_v(v);
  std::vector<std::uint8_t> d(static_cast<std::size_t>(sigma.size()));
  for (Eigen::Index i = 0; i < sigma.size(); ++i) {
    if (sigma[i] < 0.0) fail(ErrorCode::kDomain, "singular values must be nonnegative");
    if (i > 0 && sigma[i] > sigma[i - 1]) {
      fail(ErrorCode::kDomain, "singular values must be sorted nonincreasing");
    }
    // Ties at exactly v belong to the capped piece.
    d[static_cast<std::size_t>(i)] = sigma[i] < v ? 1 : 2;
  }
  return DcVector(std::move(d));
}

double capped_l1_sum(const Vector& x, double v) {
  double total = 0.0;
  for (Eigen::Index i = 0; i < x.size(); ++i) total += capped_l1(x[i], v);
  return total;
}

double phi_d(const Vector& x, const DcVector& d, double v) {
  check_v(v);
  check_sizes(static_cast<std::size_t>(x.size()), d.size());
  double total = 0.0;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    total += x[i] / v - dc_piece(x[i], d[static_cast<std::size_t>(i)], v);
  }
  return total;
}

Vector prox_phi_d(const Vector& w, const DcVector& d, double tau, double v) {
  check_v(v);
  if (!(tau > 0.0)) fail(ErrorCode::kInvalidArgument, "prox step tau must be positive");
  check_sizes(static_cast<std::size_t>(w.size()), d.size());
  const double shift = tau / v;
  Vector out(w.size());
  for (Eigen::Index i = 0; i < w.size(); ++i) {
    if (d[static_cast<std::size_t>(i)] == 1) {
      out[i] = std::max(w[i] - shift, 0.0);
    } else {
      out[i] = std::max(w[i], 0.0);
    }
  }
  return out;
}

}  // namespace gimspg
