#include "fda/fpca.hpp"

#include <algorithm>

namespace fda {

namespace {

constexpr double kDefaultVarianceShare = 0.95;
constexpr double kClampTolerance = 1e-10;

}  // namespace

MatrixXd FpcaResult::eigenfunctions(const EvalGrid& grid) const {
  return evaluate(basis, grid) * eigen_coeffs;
}

int components_for_variance(const VectorXd& all_eigenvalues, double threshold) {
  const double total = all_eigenvalues.sum();
  if (!(total > 0.0)) return 1;
  double running = 0.0;
  for (Eigen::Index j = 0; j < all_eigenvalues.size(); ++j) {
    running += all_eigenvalues[j];
    if (running >= threshold * total) return static_cast<int>(j + 1);
  }
  return static_cast<int>(all_eigenvalues.size());
}

FpcaResult fpca(const FunctionalDataSet& ds, std::optional<int> components) {
  const Eigen::Index n = ds.size();
  const int k = ds.basis().size();
  const int max_components = static_cast<int>(std::min<Eigen::Index>(n, k));
  if (components && (*components < 1 || *components > max_components))
    throw ArgumentError("number of components must lie in [1, " + std::to_string(max_components) + "], got " +
                        std::to_string(*components));

  CenteredDataSet cds = center(ds);
  MatrixXd gram = gram_matrix(ds.basis());
  const auto roots = gram_sqrt(gram);

  const MatrixXd z = cds.a * roots.sqrt;
  MatrixXd cov = MatrixXd::Zero(k, k);
  cov.selfadjointView<Eigen::Lower>().rankUpdate(z.transpose(), 1.0 / static_cast<double>(n));
  const MatrixXd sym = cov.selfadjointView<Eigen::Lower>();

  Eigen::SelfAdjointEigenSolver<MatrixXd> eig(sym);
  if (eig.info() != Eigen::Success) throw NumericalError("fpca: eigendecomposition failed");

  // Eigen returns ascending order; take the top min(n, K).
  VectorXd values = eig.eigenvalues().reverse().head(max_components);
  MatrixXd vectors = eig.eigenvectors().rowwise().reverse().leftCols(max_components);

  const double top = std::max(values.size() ? values[0] : 0.0, 0.0);
  for (Eigen::Index j = 0; j < values.size(); ++j) {
    if (values[j] < 0.0) {
      if (values[j] < -kClampTolerance * top && top > 0.0)
        throw NumericalError("fpca: covariance eigenvalue " + std::to_string(values[j]) + " is significantly negative");
      values[j] = 0.0;
    }
  }

  MatrixXd b = roots.inv_sqrt * vectors;
  for (Eigen::Index j = 0; j < b.cols(); ++j) {
    Eigen::Index pivot = 0;
    b.col(j).cwiseAbs().maxCoeff(&pivot);
    if (b(pivot, j) < 0.0) b.col(j) = -b.col(j);
  }

  const int p = components ? *components : components_for_variance(values, kDefaultVarianceShare);

  FpcaResult result{ds.basis(), std::move(cds.mean), gram, values.head(p), b.leftCols(p), MatrixXd(), values};
  result.scores = cds.a * gram * result.eigen_coeffs;
  return result;
}

VectorXd explained_variance(const FpcaResult& result) {
  const double total = result.all_eigenvalues.sum();
  if (!(total > 0.0)) throw NumericalError("explained_variance: total variance is zero");
  return result.eigenvalues / total;
}

MatrixXd reconstruct(const FpcaResult& result, int p_use, const EvalGrid& grid) {
  if (p_use < 1 || p_use > result.components())
    throw ArgumentError("reconstruct: component count must lie in [1, " + std::to_string(result.components()) + "]");
  const MatrixXd phi = evaluate(result.basis, grid);
  const VectorXd mu = phi * result.mean.coefficients;
  const MatrixXd f = phi * result.eigen_coeffs.leftCols(p_use);
  MatrixXd out = result.scores.leftCols(p_use) * f.transpose();
  out.rowwise() += mu.transpose();
  return out;
}

MatrixXd project_scores(const FpcaResult& result, const FunctionalDataSet& curves) {
  if (!(curves.basis() == result.basis)) throw ArgumentError("project_scores: curves use a different basis");
  const MatrixXd centered = curves.coefficients().rowwise() - result.mean.coefficients.transpose();
  return centered * result.gram * result.eigen_coeffs;
}

}  // namespace fda
