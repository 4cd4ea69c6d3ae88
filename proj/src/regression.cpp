#include "fda/regression.hpp"

#include <cmath>
#include <limits>

namespace fda {

std::string to_string(Link link) {
  switch (link) {
    case Link::Identity: return "identity";
    case Link::Log: return "log";
    case Link::Logit: return "logit";
  }
  return "identity";
}

Link link_from_string(const std::string& name) {
  if (name == "identity") return Link::Identity;
  if (name == "log") return Link::Log;
  if (name == "logit") return Link::Logit;
  throw ArgumentError("unknown link '" + name + "' (expected identity, log or logit)");
}

namespace {

constexpr int kMaxIterations = 100;
constexpr double kTolerance = 1e-8;
constexpr int kMaxHalvings = 40;

struct WeightedSolution {
  VectorXd coefficients;
  MatrixXd normal_inverse;  // (X^T W X)^{-1}
};

WeightedSolution weighted_least_squares(const MatrixXd& design, const VectorXd& target, const VectorXd* weights) {
  MatrixXd x = design;
  VectorXd y = target;
  if (weights) {
    const VectorXd root = weights->cwiseSqrt();
    x = root.asDiagonal() * design;
    y = root.cwiseProduct(target);
  }
  Eigen::ColPivHouseholderQR<MatrixXd> qr(x);
  qr.setThreshold(1e-10);
  if (qr.rank() < x.cols())
    throw CollinearityError("regression design [1 | Z | scores] is rank deficient (rank " + std::to_string(qr.rank()) +
                            " < " + std::to_string(x.cols()) + ")");
  WeightedSolution out;
  out.coefficients = qr.solve(y);
  const MatrixXd normal = x.transpose() * x;
  out.normal_inverse = normal.ldlt().solve(MatrixXd::Identity(normal.rows(), normal.cols()));
  return out;
}

struct Problem {
  FpcaResult fpca;
  MatrixXd design;
  Eigen::Index n_covariates = 0;
};

Problem prepare(const FunctionalDataSet& ds, const std::optional<MatrixXd>& covariates, const VectorXd& response,
                std::optional<int> components) {
  const Eigen::Index n = ds.size();
  if (response.size() != n)
    throw ArgumentError("response has " + std::to_string(response.size()) + " entries for " + std::to_string(n) +
                        " curves");
  if (!response.allFinite()) throw DataError("response contains non-finite values");
  const Eigen::Index d = covariates ? covariates->cols() : 0;
  if (covariates) {
    if (covariates->rows() != n) throw ArgumentError("scalar covariates have a different number of rows than curves");
    if (!covariates->allFinite()) throw DataError("scalar covariates contain non-finite values");
  }

  FpcaResult pca = fpca(ds, components);
  const Eigen::Index p = pca.components();
  if (n <= 1 + d + p)
    throw ArgumentError("regression needs n > 1 + d + P (n = " + std::to_string(n) + ", d = " + std::to_string(d) +
                        ", P = " + std::to_string(p) + ")");

  MatrixXd design(n, 1 + d + p);
  design.col(0).setOnes();
  if (covariates) design.middleCols(1, d) = *covariates;
  design.rightCols(p) = pca.scores;
  return {std::move(pca), std::move(design), d};
}

void unpack(const VectorXd& beta, Eigen::Index d, RegressionFit& fit) {
  fit.alpha = beta[0];
  fit.theta = beta.segment(1, d);
  fit.d_coeffs = beta.tail(beta.size() - 1 - d);
}

double softplus(double x) { return x > 0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x)); }

VectorXd mean_from_eta(Link link, const VectorXd& eta) {
  switch (link) {
    case Link::Identity: return eta;
    case Link::Log: return eta.array().exp();
    case Link::Logit: return eta.unaryExpr([](double e) { return 1.0 / (1.0 + std::exp(-e)); });
  }
  return eta;
}

double deviance(Link link, const VectorXd& y, const VectorXd& eta) {
  double total = 0.0;
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    switch (link) {
      case Link::Identity: {
        const double r = y[i] - eta[i];
        total += r * r;
        break;
      }
      case Link::Log: {
        const double mu = std::exp(eta[i]);
        total += 2.0 * ((y[i] > 0 ? y[i] * (std::log(y[i]) - eta[i]) : 0.0) - (y[i] - mu));
        break;
      }
      case Link::Logit:
        total += 2.0 * (y[i] * softplus(-eta[i]) + (1.0 - y[i]) * softplus(eta[i]));
        break;
    }
  }
  return total;
}

void check_response(Link link, const VectorXd& y) {
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    if (link == Link::Logit && y[i] != 0.0 && y[i] != 1.0)
      throw DataError("logit link needs responses in {0, 1}");
    if (link == Link::Log && y[i] < 0.0) throw DataError("log link needs nonnegative responses");
  }
}

}  // namespace

VectorXd inverse_link(Link link, const VectorXd& eta) { return mean_from_eta(link, eta); }

RegressionFit fit_flm(const FunctionalDataSet& ds, const std::optional<MatrixXd>& covariates, const VectorXd& response,
                      std::optional<int> components) {
  Problem problem = prepare(ds, covariates, response, components);
  const auto solution = weighted_least_squares(problem.design, response, nullptr);

  RegressionFit fit{.fpca = std::move(problem.fpca), .link = Link::Identity};
  unpack(solution.coefficients, problem.n_covariates, fit);
  const VectorXd residuals = response - problem.design * solution.coefficients;
  const double rss = residuals.squaredNorm();
  fit.dispersion = rss / static_cast<double>(problem.design.rows() - problem.design.cols());
  fit.std_errors = (fit.dispersion * solution.normal_inverse.diagonal()).cwiseSqrt();
  fit.deviance = rss;
  fit.deviance_trace = {rss};
  fit.iterations = 1;
  return fit;
}

RegressionFit fit_gflm(const FunctionalDataSet& ds, const std::optional<MatrixXd>& covariates,
                       const VectorXd& response, std::optional<int> components, Link link) {
  // Unit weights and working response y: a single IRLS step is OLS.
  if (link == Link::Identity) return fit_flm(ds, covariates, response, components);
  check_response(link, response);

  Problem problem = prepare(ds, covariates, response, components);
  const MatrixXd& x = problem.design;
  const VectorXd& y = response;
  // Collinearity of the raw design is a data problem, not an IRLS failure.
  weighted_least_squares(x, y, nullptr);

  VectorXd mu = link == Link::Log ? VectorXd((y.array() + 0.1).matrix()) : VectorXd(((y.array() + 0.5) / 2.0).matrix());
  VectorXd eta = link == Link::Log ? VectorXd(mu.array().log().matrix())
                                   : VectorXd((mu.array() / (1.0 - mu.array())).log().matrix());

  RegressionFit fit{.fpca = problem.fpca, .link = link, .dispersion = 1.0};
  std::optional<VectorXd> beta;
  MatrixXd normal_inverse;
  double current = std::numeric_limits<double>::infinity();
  bool converged = false;

  for (int iter = 1; iter <= kMaxIterations && !converged; ++iter) {
    VectorXd weights(y.size()), working(y.size());
    for (Eigen::Index i = 0; i < y.size(); ++i) {
      const double d_mu = link == Link::Log ? mu[i] : mu[i] * (1.0 - mu[i]);
      weights[i] = d_mu;  // (dmu/deta)^2 / V(mu) = dmu/deta for both canonical links
      working[i] = eta[i] + (y[i] - mu[i]) / d_mu;
    }
    if (!weights.allFinite() || !working.allFinite() || weights.maxCoeff() <= 0.0)
      throw ConvergenceError("IRLS weights degenerated (fitted means saturated; possible separation); last deviance " +
                                 std::to_string(current),
                             current);
    WeightedSolution step;
    try {
      step = weighted_least_squares(x, working, &weights);
    } catch (const CollinearityError&) {
      throw ConvergenceError("IRLS weighted design lost rank (possible separation); last deviance " +
                                 std::to_string(current),
                             current);
    }

    VectorXd candidate = step.coefficients;
    VectorXd candidate_eta = x * candidate;
    double candidate_dev = deviance(link, y, candidate_eta);
    if (beta) {
      int halvings = 0;
      while (!(std::isfinite(candidate_dev) && candidate_dev <= current) && halvings < kMaxHalvings) {
        candidate = 0.5 * (candidate + *beta);
        candidate_eta = x * candidate;
        candidate_dev = deviance(link, y, candidate_eta);
        ++halvings;
      }
      if (!(std::isfinite(candidate_dev) && candidate_dev <= current)) {
        // No descent direction left: the previous iterate is the optimum.
        candidate = *beta;
        candidate_eta = x * candidate;
        candidate_dev = current;
      }
      const double change = (candidate - *beta).norm();
      converged = change <= kTolerance * std::max(beta->norm(), 1.0);
    } else if (!std::isfinite(candidate_dev)) {
      throw ConvergenceError("IRLS produced a non-finite deviance on the first step", candidate_dev);
    }

    beta = candidate;
    eta = candidate_eta;
    mu = mean_from_eta(link, eta);
    current = candidate_dev;
    normal_inverse = step.normal_inverse;
    fit.deviance_trace.push_back(current);
    fit.iterations = iter;
  }
  if (!converged)
    throw ConvergenceError("IRLS did not converge in " + std::to_string(kMaxIterations) +
                               " iterations (possible separation); last deviance " + std::to_string(current),
                           current);

  unpack(*beta, problem.n_covariates, fit);
  fit.deviance = current;
  fit.std_errors = normal_inverse.diagonal().cwiseSqrt();
  return fit;
}

VectorXd beta_function(const RegressionFit& fit, const EvalGrid& grid) {
  return fit.fpca.eigenfunctions(grid) * fit.d_coeffs;
}

VectorXd linear_predictor(const RegressionFit& fit, const FunctionalDataSet& curves,
                          const std::optional<MatrixXd>& covariates) {
  if (!(curves.basis() == fit.fpca.basis)) throw ArgumentError("predict: curves use a different basis than the fit");
  if (fit.has_covariates() != covariates.has_value())
    throw ArgumentError(fit.has_covariates() ? "predict: fit used scalar covariates but none were given"
                                             : "predict: fit used no scalar covariates");
  const MatrixXd scores = project_scores(fit.fpca, curves);
  VectorXd eta = VectorXd::Constant(curves.size(), fit.alpha) + scores * fit.d_coeffs;
  if (covariates) {
    if (covariates->rows() != curves.size() || covariates->cols() != fit.theta.size())
      throw ArgumentError("predict: scalar covariate matrix has the wrong shape");
    eta += *covariates * fit.theta;
  }
  return eta;
}

VectorXd predict(const RegressionFit& fit, const FunctionalDataSet& curves, const std::optional<MatrixXd>& covariates) {
  return mean_from_eta(fit.link, linear_predictor(fit, curves, covariates));
}

}  // namespace fda
