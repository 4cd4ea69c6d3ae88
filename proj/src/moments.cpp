#include "fda/moments.hpp"

namespace fda {

VectorXd MeanFunction::evaluate(const EvalGrid& grid) const {
  return fda::evaluate(basis, grid) * coefficients;
}

MeanFunction mean_function(const FunctionalDataSet& ds) {
  return {ds.basis(), ds.coefficients().colwise().mean().transpose()};
}

CenteredDataSet center(const FunctionalDataSet& ds) {
  MeanFunction mean = mean_function(ds);
  MatrixXd a = ds.coefficients().rowwise() - mean.coefficients.transpose();
  return {ds.basis(), std::move(a), std::move(mean)};
}

MatrixXd covariance_on_grid(const CenteredDataSet& cds, const EvalGrid& s_grid, const EvalGrid& t_grid) {
  const double n = static_cast<double>(cds.size());
  const MatrixXd t_scores = evaluate(cds.basis, t_grid) * cds.a.transpose();
  if (s_grid.points() == t_grid.points()) {
    MatrixXd c = MatrixXd::Zero(t_scores.rows(), t_scores.rows());
    c.selfadjointView<Eigen::Lower>().rankUpdate(t_scores, 1.0 / n);
    return c.selfadjointView<Eigen::Lower>();
  }
  const MatrixXd s_scores = evaluate(cds.basis, s_grid) * cds.a.transpose();
  return t_scores * s_scores.transpose() / n;
}

VectorXd apply_cov_operator(const CenteredDataSet& cds, const MatrixXd& gram, const VectorXd& f_coeffs) {
  const Eigen::Index k = cds.a.cols();
  if (gram.rows() != k || gram.cols() != k || f_coeffs.size() != k)
    throw ArgumentError("apply_cov_operator: dimension mismatch");
  const VectorXd projected = cds.a * (gram * f_coeffs);
  return cds.a.transpose() * projected / static_cast<double>(cds.size());
}

}  // namespace fda
