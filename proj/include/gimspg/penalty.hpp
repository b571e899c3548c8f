#pragma once

#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <vector>

#include <Eigen/Dense>

namespace gimspg {

using Vector = Eigen::VectorXd;

/// Capped-l1 penalty parameters: phi(t) = min{1, t/v}, weighted by lambda.
struct CappedL1Params {
  double v = 1.0;
  double lambda = 1.0;

  /// Throws unless v > 0 and lambda > 0.
  void validate() const;
  /// Throws unless v < lambda / lipschitz_f (upper bound that forces small
  /// singular values of stationary points to zero).
  void validate_against(double lipschitz_f) const;
};

/// Piece selector of the DC decomposition. Entry i is 1 when the i-th
/// singular value lies on the linear piece and 2 when it is capped.
class DcVector {
 public:
  DcVector() = default;
  explicit DcVector(std::vector<std::uint8_t> entries);
  DcVector(std::initializer_list<int> entries);

  std::size_t size() const noexcept { return entries_.size(); }
  std::uint8_t operator[](std::size_t i) const { return entries_[i]; }
  const std::vector<std::uint8_t>& entries() const noexcept { return entries_; }

  /// Number of positions where the two selectors differ. Sizes must match.
  std::size_t count_changes(const DcVector& other) const;

  /// Builds the selector whose i-th entry is bit i of `mask` plus one.
  static DcVector from_bits(std::uint64_t mask, std::size_t n);

  friend bool operator==(const DcVector&, const DcVector&) = default;

 private:
  std::vector<std::uint8_t> entries_;
};

/// min{1, t/v}. Rejects t < 0.
double capped_l1(double t, double v);

/// theta_1(t) = 0, theta_2(t) = t/v - 1.
double dc_piece(double t, int branch, double v);

/// Derivative of dc_piece in t: 0 on branch 1 and 1/v on branch 2.
double dc_piece_slope(int branch, double v);

/// Selector for a nonincreasing nonnegative spectrum: 1 iff sigma_i < v.
DcVector dc_select(const Vector& sigma, double v);

/// Sum of capped_l1 over the entries of x.
double capped_l1_sum(const Vector& x, double v);

/// Sum over i of x_i/v - theta_{d_i}(x_i): the convex majorant selected by d.
double phi_d(const Vector& x, const DcVector& d, double v);

/// argmin_x tau * phi_d(x) + 0.5 * ||x - w||^2, in closed form.
/// Branch-1 entries are soft-thresholded by tau/v, branch-2 entries pass
/// through; both are floored at zero.
Vector prox_phi_d(const Vector& w, const DcVector& d, double tau, double v);

}  // namespace gimspg
