#include "fda/smoothing.hpp"

#include <cmath>
#include <unordered_set>

#include "fda/parallel.hpp"

namespace fda {

FunctionalDataSet::FunctionalDataSet(BasisSystem basis, MatrixXd coefficients, std::vector<std::string> ids)
    : basis_(std::move(basis)), coefficients_(std::move(coefficients)), ids_(std::move(ids)) {
  if (coefficients_.rows() < 1) throw ArgumentError("functional dataset needs at least one curve");
  if (coefficients_.cols() != basis_.size())
    throw ArgumentError("coefficient matrix has " + std::to_string(coefficients_.cols()) + " columns, basis has " +
                        std::to_string(basis_.size()) + " functions");
  if (static_cast<Eigen::Index>(ids_.size()) != coefficients_.rows())
    throw ArgumentError("number of ids does not match number of coefficient rows");
  std::unordered_set<std::string> seen;
  for (const auto& id : ids_) {
    if (!seen.insert(id).second) throw DataError("duplicate curve id '" + id + "'");
  }
}

FunctionalDataSet FunctionalDataSet::subset(std::span<const Eigen::Index> rows) const {
  MatrixXd coefs(static_cast<Eigen::Index>(rows.size()), coefficients_.cols());
  std::vector<std::string> ids;
  ids.reserve(rows.size());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (rows[r] < 0 || rows[r] >= size()) throw ArgumentError("subset row out of range");
    coefs.row(static_cast<Eigen::Index>(r)) = coefficients_.row(rows[r]);
    ids.push_back(ids_[static_cast<std::size_t>(rows[r])]);
  }
  return {basis_, std::move(coefs), std::move(ids)};
}

VectorXd fit_coefficients(const RawCurve& curve, const BasisSystem& basis, double ridge) {
  if (!(ridge >= 0.0) || !std::isfinite(ridge)) throw ArgumentError("ridge penalty must be a finite nonnegative number");
  if (curve.times.size() != curve.values.size())
    throw DataError("curve '" + curve.id + "': times and values differ in length");
  if (curve.times.empty()) throw DataError("curve '" + curve.id + "' has no observations");
  for (double v : curve.values) {
    if (!std::isfinite(v)) throw DataError("curve '" + curve.id + "' has a non-finite value");
  }

  const int k = basis.size();
  const auto l = static_cast<Eigen::Index>(curve.times.size());
  MatrixXd design;
  try {
    design = evaluate(basis, std::span<const double>(curve.times));
  } catch (const DomainError& e) {
    throw DomainError("curve '" + curve.id + "': " + e.what());
  }
  VectorXd rhs = Eigen::Map<const VectorXd>(curve.values.data(), l);

  if (ridge > 0.0) {
    MatrixXd augmented(l + k, k);
    augmented << design, std::sqrt(ridge) * MatrixXd::Identity(k, k);
    VectorXd augmented_rhs = VectorXd::Zero(l + k);
    augmented_rhs.head(l) = rhs;
    design.swap(augmented);
    rhs.swap(augmented_rhs);
  } else if (l < k) {
    throw RankError("curve '" + curve.id + "': " + std::to_string(l) + " observations cannot determine " +
                    std::to_string(k) + " coefficients");
  }

  Eigen::ColPivHouseholderQR<MatrixXd> qr(design);
  qr.setThreshold(1e-10);
  if (qr.rank() < k)
    throw RankError("curve '" + curve.id + "': design matrix is rank deficient (rank " + std::to_string(qr.rank()) +
                    " < " + std::to_string(k) + ")");
  return qr.solve(rhs);
}

FunctionalDataSet build_dataset(std::span<const RawCurve> curves, const BasisSystem& basis, double ridge,
                                unsigned threads) {
  if (curves.empty()) throw ArgumentError("cannot build a dataset from zero curves");
  MatrixXd coefficients(static_cast<Eigen::Index>(curves.size()), basis.size());
  parallel_for(curves.size(), threads, [&](std::size_t i) {
    coefficients.row(static_cast<Eigen::Index>(i)) = fit_coefficients(curves[i], basis, ridge).transpose();
  });
  std::vector<std::string> ids;
  ids.reserve(curves.size());
  for (const auto& curve : curves) ids.push_back(curve.id);
  return {basis, std::move(coefficients), std::move(ids)};
}

MatrixXd eval_curves(const FunctionalDataSet& ds, const EvalGrid& grid) {
  return ds.coefficients() * evaluate(ds.basis(), grid).transpose();
}

}  // namespace fda
