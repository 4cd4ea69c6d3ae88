#include "fda/simulate.hpp"

#include <cmath>
#include <cstdio>
#include <numbers>

namespace fda {

double NormalStream::next() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  double u1 = 0.0;
  do {
    u1 = uniform();
  } while (u1 <= 0.0);
  const double u2 = uniform();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double angle = 2.0 * std::numbers::pi * u2;
  spare_ = r * std::sin(angle);
  has_spare_ = true;
  return r * std::cos(angle);
}

namespace {

void validate(const KlModel& model) {
  if (model.mean_coefficients.size() != model.basis.size())
    throw ArgumentError("mean coefficients must have one entry per basis function");
  if (model.eigenvalues.empty()) throw ArgumentError("KL model needs at least one eigenvalue");
  if (static_cast<int>(model.eigenvalues.size()) > model.basis.size())
    throw ArgumentError("KL model has more eigenvalues than basis functions");
  for (std::size_t j = 0; j < model.eigenvalues.size(); ++j) {
    if (!(model.eigenvalues[j] >= 0.0)) throw ArgumentError("KL eigenvalues must be nonnegative");
    if (j > 0 && model.eigenvalues[j] > model.eigenvalues[j - 1])
      throw ArgumentError("KL eigenvalues must be nonincreasing");
  }
  if (!(model.noise_sd >= 0.0)) throw ArgumentError("noise_sd must be nonnegative");
}

}  // namespace

MatrixXd kl_eigenfunctions(const KlModel& model, const EvalGrid& grid) {
  const int j = static_cast<int>(model.eigenvalues.size());
  const auto fourier = BasisSystem::fourier(j % 2 == 1 ? j : j + 1, model.basis.domain());
  return evaluate(fourier, grid).leftCols(j);
}

std::vector<RawCurve> simulate(const KlModel& model, int n, const EvalGrid& grid, std::uint64_t seed) {
  validate(model);
  if (n < 1) throw ArgumentError("simulate needs n >= 1");
  const MatrixXd f = kl_eigenfunctions(model, grid);
  const VectorXd mu = evaluate(model.basis, grid) * model.mean_coefficients;
  const auto sd = Eigen::Map<const VectorXd>(model.eigenvalues.data(), static_cast<Eigen::Index>(model.eigenvalues.size()))
                      .cwiseSqrt()
                      .eval();

  NormalStream normals(seed);
  std::vector<RawCurve> curves(static_cast<std::size_t>(n));
  VectorXd xi(sd.size());
  for (int i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < xi.size(); ++j) xi[j] = sd[j] * normals.next();
    VectorXd x = mu + f * xi;
    if (model.noise_sd > 0.0)
      for (Eigen::Index l = 0; l < x.size(); ++l) x[l] += model.noise_sd * normals.next();
    char id[32];
    std::snprintf(id, sizeof id, "curve_%04d", i + 1);
    auto& curve = curves[static_cast<std::size_t>(i)];
    curve.id = id;
    curve.times = grid.points();
    curve.values.assign(x.data(), x.data() + x.size());
  }
  return curves;
}

}  // namespace fda
