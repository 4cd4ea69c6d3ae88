#pragma once

// Test-only oracles and fixtures. Nothing here calls into the code paths it
// is used to check (no gram_matrix, no fpca, no Cox-de Boor triangle).

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <random>
#include <vector>

#include "fda/fda.hpp"

namespace fda::testing {

inline double uniform01(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

inline double normal(std::mt19937_64& rng) {
  double u1 = 0.0;
  do {
    u1 = uniform01(rng);
  } while (u1 <= 0.0);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * 3.14159265358979323846 * uniform01(rng));
}

inline MatrixXd random_matrix(Eigen::Index rows, Eigen::Index cols, std::mt19937_64& rng) {
  MatrixXd m(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j)
    for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = normal(rng);
  return m;
}

/// Textbook recursive Cox-de Boor definition on a full knot vector; the last
/// nonempty interval is closed on the right.
inline double cox_de_boor(const std::vector<double>& u, int i, int degree, double t) {
  if (degree == 0) {
    const double hi = u.back();
    if (u[i] <= t && t < u[i + 1]) return 1.0;
    // Right end of the domain belongs to the last nonempty interval.
    if (t == hi && u[i] < u[i + 1] && u[i + 1] == hi) return 1.0;
    return 0.0;
  }
  double value = 0.0;
  const double left_den = u[i + degree] - u[i];
  const double right_den = u[i + degree + 1] - u[i + 1];
  if (left_den > 0.0) value += (t - u[i]) / left_den * cox_de_boor(u, i, degree - 1, t);
  if (right_den > 0.0) value += (u[i + degree + 1] - t) / right_den * cox_de_boor(u, i + 1, degree - 1, t);
  return value;
}

/// Composite trapezoid weights for a grid.
inline VectorXd trapezoid_weights(const std::vector<double>& t) {
  VectorXd w = VectorXd::Zero(static_cast<Eigen::Index>(t.size()));
  for (std::size_t l = 0; l + 1 < t.size(); ++l) {
    const double h = t[l + 1] - t[l];
    w[static_cast<Eigen::Index>(l)] += 0.5 * h;
    w[static_cast<Eigen::Index>(l + 1)] += 0.5 * h;
  }
  return w;
}

/// Composite Simpson weights for a uniform grid with an odd number of points.
inline VectorXd simpson_weights(const std::vector<double>& t) {
  const auto n = static_cast<Eigen::Index>(t.size());
  const double h = (t.back() - t.front()) / static_cast<double>(n - 1);
  VectorXd w(n);
  for (Eigen::Index l = 0; l < n; ++l) w[l] = (l == 0 || l == n - 1) ? 1.0 : (l % 2 == 1 ? 4.0 : 2.0);
  return w * h / 3.0;
}

/// Weighted multivariate PCA of curves sampled on a dense grid.
struct GridPca {
  VectorXd eigenvalues;  // all nonzero-capable ones, descending (min(n, L))
  MatrixXd scores;       // n x r, column j has magnitude sqrt(n lambda_j)
};

/// Dual formulation: eigenpairs of (1/n) Xc D Xc^T, whose nonzero spectrum
/// equals that of the weighted covariance operator.
inline GridPca grid_pca(const MatrixXd& values, const VectorXd& w) {
  const auto n = static_cast<double>(values.rows());
  const MatrixXd centered = values.rowwise() - values.colwise().mean();
  const MatrixXd dual = centered * w.asDiagonal() * centered.transpose() / n;
  Eigen::SelfAdjointEigenSolver<MatrixXd> eig((dual + dual.transpose()) / 2.0);
  GridPca out;
  out.eigenvalues = eig.eigenvalues().reverse();
  const MatrixXd v = eig.eigenvectors().rowwise().reverse();
  out.scores = v * (n * out.eigenvalues.cwiseMax(0.0)).cwiseSqrt().asDiagonal();
  return out;
}

inline GridPca grid_pca(const MatrixXd& values, const std::vector<double>& grid) {
  return grid_pca(values, trapezoid_weights(grid));
}

inline std::vector<double> linspace(double lo, double hi, int n) {
  std::vector<double> t(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) t[static_cast<std::size_t>(i)] = lo + (hi - lo) * i / (n - 1);
  t.back() = hi;
  return t;
}

/// Adjusted Rand index between two labelings.
inline double adjusted_rand_index(const std::vector<int>& a, const std::vector<int>& b) {
  std::map<std::pair<int, int>, double> joint;
  std::map<int, double> ca, cb;
  for (std::size_t i = 0; i < a.size(); ++i) {
    joint[{a[i], b[i]}] += 1;
    ca[a[i]] += 1;
    cb[b[i]] += 1;
  }
  auto choose2 = [](double x) { return x * (x - 1) / 2; };
  double index = 0, sa = 0, sb = 0;
  for (const auto& [k, v] : joint) index += choose2(v);
  for (const auto& [k, v] : ca) sa += choose2(v);
  for (const auto& [k, v] : cb) sb += choose2(v);
  const double total = choose2(static_cast<double>(a.size()));
  const double expected = sa * sb / total;
  const double maximum = 0.5 * (sa + sb);
  if (maximum == expected) return 1.0;
  return (index - expected) / (maximum - expected);
}

inline std::vector<std::string> make_ids(Eigen::Index n, const std::string& prefix = "c") {
  std::vector<std::string> ids;
  for (Eigen::Index i = 0; i < n; ++i) ids.push_back(prefix + std::to_string(i));
  return ids;
}

/// n random curves in a cubic B-spline basis on [0, 1].
inline FunctionalDataSet random_bspline_dataset(Eigen::Index n, int k, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const auto basis = BasisSystem::bspline(k, 4, {0.0, 1.0});
  // Decaying column scales give a spread-out spectrum.
  MatrixXd coefs = random_matrix(n, k, rng);
  for (int j = 0; j < k; ++j) coefs.col(j) *= 1.0 + 3.0 * std::sin(0.7 * j + 0.3) * std::sin(0.7 * j + 0.3);
  return {basis, coefs, make_ids(n)};
}

/// Separated bundles of curves: each bundle is a template curve plus small
/// random perturbations. Returns the dataset and the 1-based bundle labels.
struct Bundles {
  FunctionalDataSet ds;
  std::vector<int> labels;
};

inline Bundles make_bundles(int groups, int per_group, std::uint64_t seed, double spread = 0.05) {
  std::mt19937_64 rng(seed);
  const auto basis = BasisSystem::bspline(10, 4, {0.0, 1.0});
  MatrixXd coefs(groups * per_group, basis.size());
  std::vector<int> labels;
  for (int g = 0; g < groups; ++g) {
    // Templates: shifted bumps/levels, far apart in L2 relative to spread.
    VectorXd base(basis.size());
    for (int k = 0; k < basis.size(); ++k) base[k] = 3.0 * g + 2.0 * std::sin(0.9 * k * (g + 1));
    for (int i = 0; i < per_group; ++i) {
      const int row = g * per_group + i;
      for (int k = 0; k < basis.size(); ++k) coefs(row, k) = base[k] + spread * normal(rng);
      labels.push_back(g + 1);
    }
  }
  return {FunctionalDataSet(basis, coefs, make_ids(groups * per_group, "b")), labels};
}

}  // namespace fda::testing

namespace fda::testing {

/// Fourier KL model on [0, 1] with K = 5 and the given eigenvalues.
inline KlModel fourier_kl_model(std::vector<double> eigenvalues, double noise_sd = 0.0) {
  const auto basis = BasisSystem::fourier(5, {0.0, 1.0});
  VectorXd mean(5);
  mean << 1.0, 0.5, -0.3, 0.0, 0.2;
  return {basis, mean, std::move(eigenvalues), noise_sd};
}

/// Simulates on a 101-point grid and smooths back into the model basis.
inline FunctionalDataSet kl_dataset(const KlModel& model, int n, std::uint64_t seed) {
  const auto grid = EvalGrid::uniform(model.basis.domain(), 101);
  return build_dataset(simulate(model, n, grid, seed), model.basis);
}

}  // namespace fda::testing
