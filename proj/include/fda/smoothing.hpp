#pragma once

#include <span>
#include <string>
#include <vector>

#include "fda/basis.hpp"

namespace fda {

/// Discrete noisy observations of one latent curve.
struct RawCurve {
  std::string id;
  std::vector<double> times;
  std::vector<double> values;
};

/// n curves as basis coefficients: row i of `coefficients` is a_i^T, so
/// X_i(t) = phi(t) a_i.
class FunctionalDataSet {
 public:
  FunctionalDataSet(BasisSystem basis, MatrixXd coefficients, std::vector<std::string> ids);

  const BasisSystem& basis() const { return basis_; }
  const MatrixXd& coefficients() const { return coefficients_; }
  const std::vector<std::string>& ids() const { return ids_; }
  Eigen::Index size() const { return coefficients_.rows(); }

  /// Rows picked by index, in the given order.
  FunctionalDataSet subset(std::span<const Eigen::Index> rows) const;

 private:
  BasisSystem basis_;
  MatrixXd coefficients_;
  std::vector<std::string> ids_;
};

/// Penalized least squares: argmin_a sum_l (x_l - phi(t_l) a)^2 + ridge |a|^2,
/// solved by column-pivoted QR of the (augmented) design.
VectorXd fit_coefficients(const RawCurve& curve, const BasisSystem& basis, double ridge = 0.0);

/// Fits every curve independently; row order follows `curves`.
FunctionalDataSet build_dataset(std::span<const RawCurve> curves, const BasisSystem& basis, double ridge = 0.0,
                                unsigned threads = 1);

/// n x |grid| matrix of X_i(t_l).
MatrixXd eval_curves(const FunctionalDataSet& ds, const EvalGrid& grid);

}  // namespace fda
