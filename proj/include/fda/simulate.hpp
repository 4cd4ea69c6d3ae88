#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "fda/smoothing.hpp"

namespace fda {

/// Truncated Karhunen-Loeve model
///   X_i(t) = mu(t) + sum_j sqrt(lambda_j) xi_ij f_j(t) + noise_sd * e_il,
/// with mu(t) = phi(t) mean_coefficients in `basis`, f_j the first J
/// orthonormal Fourier functions on the basis domain, and xi, e independent
/// standard normal.
struct KlModel {
  BasisSystem basis;
  VectorXd mean_coefficients;
  std::vector<double> eigenvalues;
  double noise_sd = 0.0;
};

/// f_j(t_l) for j < J, |grid| x J.
MatrixXd kl_eigenfunctions(const KlModel& model, const EvalGrid& grid);

/// n noiseless-or-noisy curves on `grid`, ids "curve_0001", ...
/// Deterministic per seed; curve i draws its J scores then its noise.
std::vector<RawCurve> simulate(const KlModel& model, int n, const EvalGrid& grid, std::uint64_t seed);

/// Standard normals by Box-Muller on std::mt19937_64, so streams do not
/// depend on the standard library's distribution implementation.
class NormalStream {
 public:
  explicit NormalStream(std::uint64_t seed) : engine_(seed) {}
  double next();
  /// Uniform on [0, 1).
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace fda
