#pragma once

#include "fda/smoothing.hpp"

namespace fda {

/// Empirical mean mu(t) = phi(t) * (1/n) sum_i a_i.
struct MeanFunction {
  BasisSystem basis;
  VectorXd coefficients;

  VectorXd evaluate(const EvalGrid& grid) const;
};

/// Row i of `a` holds (a_i - mean)^T.
struct CenteredDataSet {
  BasisSystem basis;
  MatrixXd a;
  MeanFunction mean;

  Eigen::Index size() const { return a.rows(); }
};

MeanFunction mean_function(const FunctionalDataSet& ds);
CenteredDataSet center(const FunctionalDataSet& ds);

/// Entry (l, m) = C(s_m, t_l) = (1/n) phi(t_l) A^T A phi(s_m)^T.
MatrixXd covariance_on_grid(const CenteredDataSet& cds, const EvalGrid& s_grid, const EvalGrid& t_grid);

/// Coefficients of Gamma f for f(t) = phi(t) f_coeffs: (1/n) A^T A W f_coeffs.
VectorXd apply_cov_operator(const CenteredDataSet& cds, const MatrixXd& gram, const VectorXd& f_coeffs);

}  // namespace fda
