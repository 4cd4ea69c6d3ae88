#pragma once

#include <Eigen/Dense>

#include <span>
#include <string>
#include <utility>
#include <vector>

#include "fda/error.hpp"

namespace fda {

template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

using Eigen::MatrixXd;
using Eigen::RowVectorXd;
using Eigen::VectorXd;

enum class BasisKind { Fourier, BSpline };

std::string to_string(BasisKind kind);
BasisKind basis_kind_from_string(const std::string& name);

/// Closed interval [lo, hi] with lo < hi.
struct Domain {
  double lo = 0.0;
  double hi = 1.0;

  double length() const { return hi - lo; }
  bool contains(double t) const { return t >= lo && t <= hi; }
  bool operator==(const Domain&) const = default;
};

/// A finite function system {phi_1, ..., phi_K} on a closed interval.
///
/// Fourier systems are orthonormal on the interval:
///   phi_1 = 1/sqrt(T), phi_2j = sqrt(2/T) sin(2 pi j (t-lo)/T),
///   phi_2j+1 = sqrt(2/T) cos(2 pi j (t-lo)/T).
/// B-spline systems are clamped: the boundary knots are repeated `order`
/// times, so K = #interior knots + order.
class BasisSystem {
 public:
  static BasisSystem fourier(int k, Domain domain);
  /// Uniformly spaced interior knots.
  static BasisSystem bspline(int k, int order, Domain domain);
  static BasisSystem bspline(std::vector<double> interior_knots, int order, Domain domain);

  BasisKind kind() const { return kind_; }
  int size() const { return k_; }
  int order() const { return order_; }
  const Domain& domain() const { return domain_; }
  const std::vector<double>& interior_knots() const { return interior_; }

  /// Full clamped knot vector (B-spline only).
  std::vector<double> knot_vector() const;

  /// (phi_1(t), ..., phi_K(t)); throws DomainError outside the domain.
  RowVectorXd values_at(double t) const;

  bool operator==(const BasisSystem&) const = default;

 private:
  BasisSystem(BasisKind kind, int k, int order, Domain domain, std::vector<double> interior);

  void bspline_values(double t, Eigen::Ref<RowVectorXd> out) const;

  BasisKind kind_;
  int k_;
  int order_;
  Domain domain_;
  std::vector<double> interior_;
  std::vector<double> knots_;
};

/// Strictly increasing evaluation points.
class EvalGrid {
 public:
  explicit EvalGrid(std::vector<double> points);
  /// n equispaced points including both ends.
  static EvalGrid uniform(Domain domain, int n);

  const std::vector<double>& points() const { return points_; }
  std::size_t size() const { return points_.size(); }

 private:
  std::vector<double> points_;
};

/// |grid| x K matrix with row l = phi(t_l).
MatrixXd evaluate(const BasisSystem& basis, const EvalGrid& grid);
/// Same for arbitrary (unordered) points.
MatrixXd evaluate(const BasisSystem& basis, std::span<const double> points);

/// W = int phi(s)^T phi(s) ds. Closed form for Fourier, Gauss-Legendre per
/// knot span for B-splines.
MatrixXd gram_matrix(const BasisSystem& basis);

/// Gauss-Legendre nodes and weights on [-1, 1].
std::pair<VectorXd, VectorXd> gauss_legendre(int n);

template <typename Scalar>
struct GramRoots {
  Matrix<Scalar> sqrt;
  Matrix<Scalar> inv_sqrt;
};

/// Symmetric square root of a PSD matrix and its pseudo-inverse square root.
/// Eigenvalues below 1e-10 * lambda_max count as zero; any eigenvalue below
/// minus that floor is a NumericalError.
template <typename Derived>
GramRoots<typename Derived::Scalar> gram_sqrt(const Eigen::MatrixBase<Derived>& w) {
  using Scalar = typename Derived::Scalar;
  if (w.rows() != w.cols()) throw ArgumentError("gram_sqrt: matrix is not square");
  const Matrix<Scalar> sym = (w + w.transpose()) / Scalar(2);
  Eigen::SelfAdjointEigenSolver<Matrix<Scalar>> eig(sym);
  if (eig.info() != Eigen::Success) throw NumericalError("gram_sqrt: eigendecomposition failed");
  const auto& values = eig.eigenvalues();
  const Scalar top = values.size() ? values.maxCoeff() : Scalar(0);
  const Scalar floor = Scalar(1e-10) * std::max(top, Scalar(0));
  Vector<Scalar> root(values.size()), inv_root(values.size());
  for (Eigen::Index i = 0; i < values.size(); ++i) {
    if (values[i] < -floor) throw NumericalError("gram_sqrt: matrix is not positive semi-definite");
    root[i] = values[i] > 0 ? std::sqrt(values[i]) : Scalar(0);
    inv_root[i] = values[i] > floor ? Scalar(1) / std::sqrt(values[i]) : Scalar(0);
  }
  const auto& v = eig.eigenvectors();
  return {v * root.asDiagonal() * v.transpose(), v * inv_root.asDiagonal() * v.transpose()};
}

}  // namespace fda
