#pragma once

#include <optional>
#include <string>
#include <vector>

#include "fda/fpca.hpp"

namespace fda {

enum class Link { Identity, Log, Logit };

std::string to_string(Link link);
Link link_from_string(const std::string& name);

/// Truncated (generalized) functional linear model
///   g(E[Y_i]) = alpha + Z_i^T theta + sum_{j <= P} c_ij d_j,
/// with c_ij the FPCA scores of X_i and beta(t) = sum_j d_j f_j(t).
struct RegressionFit {
  double alpha = 0.0;
  VectorXd theta{};   // length d (empty without scalar covariates)
  VectorXd d_coeffs{};  // length P
  FpcaResult fpca;
  Link link = Link::Identity;
  /// RSS / (n - 1 - d - P) for the identity link, 1 otherwise.
  double dispersion = 0.0;
  /// Standard errors of (alpha, theta, d) from the (weighted) normal equations.
  VectorXd std_errors{};
  double deviance = 0.0;
  /// Deviance after every accepted IRLS step.
  std::vector<double> deviance_trace{};
  int iterations = 0;

  bool has_covariates() const { return theta.size() > 0; }
};

/// Ordinary least squares on the design [1 | Z | scores].
RegressionFit fit_flm(const FunctionalDataSet& ds, const std::optional<MatrixXd>& covariates, const VectorXd& response,
                      std::optional<int> components = std::nullopt);

/// IRLS with step halving on the same design. Converges when the relative
/// coefficient change is <= 1e-8; at most 100 iterations.
RegressionFit fit_gflm(const FunctionalDataSet& ds, const std::optional<MatrixXd>& covariates,
                       const VectorXd& response, std::optional<int> components, Link link);

/// beta(t_l) = sum_j d_j f_j(t_l).
VectorXd beta_function(const RegressionFit& fit, const EvalGrid& grid);

/// Linear predictor alpha + Z theta + scores d for new curves.
VectorXd linear_predictor(const RegressionFit& fit, const FunctionalDataSet& curves,
                          const std::optional<MatrixXd>& covariates);

/// g^{-1} of the linear predictor.
VectorXd predict(const RegressionFit& fit, const FunctionalDataSet& curves, const std::optional<MatrixXd>& covariates);

VectorXd inverse_link(Link link, const VectorXd& eta);

}  // namespace fda
