#pragma once

#include <cstddef>
#include <vector>

#include <Eigen/Dense>

namespace gimspg {

using Matrix = Eigen::MatrixXd;

/// One observed entry M_ij.
struct Observation {
  Eigen::Index row = 0;
  Eigen::Index col = 0;
  double value = 0.0;
};

/// The index set Omega with its observed values. Immutable after
/// construction; entries are kept sorted in column-major linear order.
class ObservationSet {
 public:
  /// Throws on rows < cols, out-of-range or duplicate indices, non-finite
  /// values, or an empty set.
  ObservationSet(Eigen::Index rows, Eigen::Index cols, std::vector<Observation> entries);

  Eigen::Index rows() const noexcept { return rows_; }
  Eigen::Index cols() const noexcept { return cols_; }
  std::size_t size() const noexcept { return entries_.size(); }
  const std::vector<Observation>& entries() const noexcept { return entries_; }

  /// P_Omega(M): observed values in place, zero elsewhere.
  Matrix project_values() const;
  /// P_Omega(X).
  Matrix project(const Matrix& x) const;
  /// 0/1 indicator of Omega.
  Matrix mask() const;

  void check_shape(const Matrix& x) const;

 private:
  Eigen::Index rows_;
  Eigen::Index cols_;
  std::vector<Observation> entries_;
};

/// Huber-type smoothing of |s|: |s| outside [-mu, mu], s^2/(2mu) + mu/2 inside.
double huber(double s, double mu);
/// Derivative of huber in s; continuous at |s| = mu.
double huber_grad(double s, double mu);

/// Constants of the smoothing contract for the masked l1 loss.
struct LossConstants {
  double kappa = 0.0;            ///< |f~(X, mu) - f(X)| <= kappa * mu
  double lipschitz_scale = 1.0;  ///< gradient Lipschitz constant is this / mu
  double lipschitz_f = 0.0;      ///< Lipschitz constant of f in Frobenius norm
};

LossConstants loss_constants(const ObservationSet& obs);

/// ||P_Omega(X - M)||_1.
double l1_loss(const Matrix& x, const ObservationSet& obs);
double smoothed_loss_value(const Matrix& x, const ObservationSet& obs, double mu);
Matrix smoothed_loss_gradient(const Matrix& x, const ObservationSet& obs, double mu);

/// A mu-parameterized smooth convex approximation of a nonsmooth convex
/// loss f. gradient(., mu) must be Lipschitz with constant
/// lipschitz_scale() / mu, and |value(X, mu) - f(X)| <= kappa() * mu.
class SmoothingFunction {
 public:
  virtual ~SmoothingFunction() = default;

  virtual double exact(const Matrix& x) const = 0;
  virtual double value(const Matrix& x, double mu) const = 0;
  virtual Matrix gradient(const Matrix& x, double mu) const = 0;
  virtual double kappa() const = 0;
  virtual double lipschitz_scale() const = 0;
  virtual double lipschitz_f() const = 0;
};

/// Entrywise Huber smoothing of ||P_Omega(X - M)||_1.
class HuberL1Loss final : public SmoothingFunction {
 public:
  explicit HuberL1Loss(const ObservationSet& obs)
      : obs_(&obs), constants_(loss_constants(obs)) {}

  double exact(const Matrix& x) const override { return l1_loss(x, *obs_); }
  double value(const Matrix& x, double mu) const override {
    return smoothed_loss_value(x, *obs_, mu);
  }
  Matrix gradient(const Matrix& x, double mu) const override {
    return smoothed_loss_gradient(x, *obs_, mu);
  }
  double kappa() const override { return constants_.kappa; }
  double lipschitz_scale() const override { return constants_.lipschitz_scale; }
  double lipschitz_f() const override { return constants_.lipschitz_f; }

 private:
  const ObservationSet* obs_;
  LossConstants constants_;
};

}  // namespace gimspg
