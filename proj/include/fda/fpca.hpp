#pragma once

#include <optional>

#include "fda/moments.hpp"

namespace fda {

/// Functional principal components of a dataset.
///
/// Eigenfunction j is f_j(t) = phi(t) b_j with b_j = eigen_coeffs.col(j);
/// scores(i, j) = <X_i - mu, f_j> = A_i W b_j.
struct FpcaResult {
  BasisSystem basis;
  MeanFunction mean;
  MatrixXd gram;
  VectorXd eigenvalues;      // retained, nonincreasing
  MatrixXd eigen_coeffs;     // K x P
  MatrixXd scores;           // n x P
  VectorXd all_eigenvalues;  // first min(n, K), used for explained variance

  int components() const { return static_cast<int>(eigenvalues.size()); }
  /// f_j(t_l) for every retained j, |grid| x P.
  MatrixXd eigenfunctions(const EvalGrid& grid) const;
};

/// Eigen-decomposes (1/n) Z^T Z with Z = A W^{1/2} and maps back through
/// W^{-1/2}. Without `components`, P is the smallest count explaining at
/// least 95% of the variance.
///
/// Each b_j is signed so its largest-magnitude entry (lowest index on ties)
/// is positive.
FpcaResult fpca(const FunctionalDataSet& ds, std::optional<int> components = std::nullopt);

/// lambda_j / sum over all min(n, K) eigenvalues.
VectorXd explained_variance(const FpcaResult& result);

/// mu(t_l) + sum_{j < p_use} c_ij f_j(t_l), n x |grid|.
MatrixXd reconstruct(const FpcaResult& result, int p_use, const EvalGrid& grid);

/// Scores of arbitrary curves on the fitted components: (a - mean)^T W B.
MatrixXd project_scores(const FpcaResult& result, const FunctionalDataSet& curves);

/// Smallest P whose cumulative explained variance reaches `threshold`.
int components_for_variance(const VectorXd& all_eigenvalues, double threshold);

}  // namespace fda
