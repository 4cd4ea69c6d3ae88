#include "fda/basis.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace fda {

std::string to_string(BasisKind kind) {
  return kind == BasisKind::Fourier ? "fourier" : "bspline";
}

BasisKind basis_kind_from_string(const std::string& name) {
  if (name == "fourier") return BasisKind::Fourier;
  if (name == "bspline") return BasisKind::BSpline;
  throw ArgumentError("unknown basis kind '" + name + "' (expected fourier or bspline)");
}

namespace {

void check_domain(Domain domain) {
  if (!std::isfinite(domain.lo) || !std::isfinite(domain.hi) || !(domain.lo < domain.hi))
    throw ArgumentError("basis domain must satisfy lo < hi");
}

std::string describe_point(double t, Domain domain) {
  std::ostringstream os;
  os.precision(17);
  os << "point " << t << " outside basis domain [" << domain.lo << ", " << domain.hi << "]";
  return os.str();
}

}  // namespace

BasisSystem::BasisSystem(BasisKind kind, int k, int order, Domain domain, std::vector<double> interior)
    : kind_(kind), k_(k), order_(order), domain_(domain), interior_(std::move(interior)) {
  if (kind_ == BasisKind::BSpline) knots_ = knot_vector();
}

BasisSystem BasisSystem::fourier(int k, Domain domain) {
  check_domain(domain);
  if (k < 1 || k % 2 == 0) throw ArgumentError("Fourier basis needs an odd number of functions, got " + std::to_string(k));
  return BasisSystem(BasisKind::Fourier, k, 0, domain, {});
}

BasisSystem BasisSystem::bspline(int k, int order, Domain domain) {
  check_domain(domain);
  if (order < 1) throw ArgumentError("B-spline order must be positive");
  if (k < order) throw ArgumentError("B-spline basis needs K >= order");
  const int n_interior = k - order;
  std::vector<double> interior(n_interior);
  for (int j = 0; j < n_interior; ++j)
    interior[j] = domain.lo + domain.length() * (j + 1) / (n_interior + 1);
  return bspline(std::move(interior), order, domain);
}

BasisSystem BasisSystem::bspline(std::vector<double> interior_knots, int order, Domain domain) {
  check_domain(domain);
  if (order < 1) throw ArgumentError("B-spline order must be positive");
  if (!std::is_sorted(interior_knots.begin(), interior_knots.end()))
    throw ArgumentError("B-spline interior knots must be nondecreasing");
  for (double knot : interior_knots) {
    if (!(knot > domain.lo && knot < domain.hi))
      throw ArgumentError("B-spline interior knots must lie strictly inside the domain");
  }
  // A knot repeated more than `order` times would create an empty basis function.
  for (std::size_t i = 0; i + order < interior_knots.size(); ++i) {
    if (interior_knots[i] == interior_knots[i + order])
      throw ArgumentError("B-spline interior knot multiplicity exceeds the order");
  }
  const int k = static_cast<int>(interior_knots.size()) + order;
  return BasisSystem(BasisKind::BSpline, k, order, domain, std::move(interior_knots));
}

std::vector<double> BasisSystem::knot_vector() const {
  if (kind_ != BasisKind::BSpline) return {};
  std::vector<double> knots;
  knots.reserve(interior_.size() + 2 * order_);
  knots.insert(knots.end(), order_, domain_.lo);
  knots.insert(knots.end(), interior_.begin(), interior_.end());
  knots.insert(knots.end(), order_, domain_.hi);
  return knots;
}

RowVectorXd BasisSystem::values_at(double t) const {
  if (!domain_.contains(t)) throw DomainError(describe_point(t, domain_));
  RowVectorXd row = RowVectorXd::Zero(k_);
  if (kind_ == BasisKind::BSpline) {
    bspline_values(t, row);
    return row;
  }
  const double period = domain_.length();
  const double x = 2.0 * std::numbers::pi * (t - domain_.lo) / period;
  const double c0 = 1.0 / std::sqrt(period);
  const double c1 = std::sqrt(2.0 / period);
  row[0] = c0;
  for (int j = 1; 2 * j < k_; ++j) {
    row[2 * j - 1] = c1 * std::sin(j * x);
    row[2 * j] = c1 * std::cos(j * x);
  }
  return row;
}

// Cox-de Boor triangle for the `order` nonzero functions on the span of t.
void BasisSystem::bspline_values(double t, Eigen::Ref<RowVectorXd> out) const {
  const int degree = order_ - 1;
  const auto& u = knots_;
  int span = static_cast<int>(std::upper_bound(u.begin(), u.end(), t) - u.begin()) - 1;
  span = std::min(span, k_ - 1);
  span = std::max(span, degree);

  std::vector<double> n(order_, 0.0), left(order_, 0.0), right(order_, 0.0);
  n[0] = 1.0;
  for (int j = 1; j <= degree; ++j) {
    left[j] = t - u[span + 1 - j];
    right[j] = u[span + j] - t;
    double saved = 0.0;
    for (int r = 0; r < j; ++r) {
      const double temp = n[r] / (right[r + 1] + left[j - r]);
      n[r] = saved + right[r + 1] * temp;
      saved = left[j - r] * temp;
    }
    n[j] = saved;
  }
  for (int j = 0; j <= degree; ++j) out[span - degree + j] = n[j];
}

EvalGrid::EvalGrid(std::vector<double> points) : points_(std::move(points)) {
  if (points_.empty()) throw ArgumentError("evaluation grid is empty");
  for (std::size_t i = 0; i < points_.size(); ++i) {
    if (!std::isfinite(points_[i])) throw ArgumentError("evaluation grid has a non-finite point");
    if (i > 0 && !(points_[i] > points_[i - 1]))
      throw ArgumentError("evaluation grid must be strictly increasing");
  }
}

EvalGrid EvalGrid::uniform(Domain domain, int n) {
  if (n < 1) throw ArgumentError("uniform grid needs at least one point");
  if (n == 1) return EvalGrid({0.5 * (domain.lo + domain.hi)});
  std::vector<double> points(n);
  for (int i = 0; i < n; ++i) points[i] = domain.lo + domain.length() * i / (n - 1);
  points.back() = domain.hi;
  return EvalGrid(std::move(points));
}

MatrixXd evaluate(const BasisSystem& basis, std::span<const double> points) {
  MatrixXd phi(static_cast<Eigen::Index>(points.size()), basis.size());
  for (std::size_t l = 0; l < points.size(); ++l) phi.row(static_cast<Eigen::Index>(l)) = basis.values_at(points[l]);
  return phi;
}

MatrixXd evaluate(const BasisSystem& basis, const EvalGrid& grid) {
  return evaluate(basis, std::span<const double>(grid.points()));
}

std::pair<VectorXd, VectorXd> gauss_legendre(int n) {
  if (n < 1) throw ArgumentError("Gauss-Legendre rule needs at least one node");
  // Returns (P_n(x), P_n'(x)) by the three-term recurrence.
  auto legendre = [n](double x) {
    double p0 = 1.0, p1 = x;
    for (int k = 2; k <= n; ++k) {
      const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
      p0 = p1;
      p1 = p2;
    }
    if (n == 1) p0 = 1.0;
    return std::pair{p1, n * (x * p1 - p0) / (x * x - 1.0)};
  };
  VectorXd nodes(n), weights(n);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    for (int iter = 0; iter < 100; ++iter) {
      const auto [p, dp] = legendre(x);
      const double dx = p / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    const double dp = legendre(x).second;
    nodes[i] = -x;
    nodes[n - 1 - i] = x;
    weights[i] = weights[n - 1 - i] = 2.0 / ((1.0 - x * x) * dp * dp);
  }
  return {nodes, weights};
}

MatrixXd gram_matrix(const BasisSystem& basis) {
  const int k = basis.size();
  if (basis.kind() == BasisKind::Fourier) return MatrixXd::Identity(k, k);

  const auto knots = basis.knot_vector();
  const auto [nodes, weights] = gauss_legendre(basis.order());
  MatrixXd w = MatrixXd::Zero(k, k);
  for (std::size_t s = 0; s + 1 < knots.size(); ++s) {
    const double a = knots[s], b = knots[s + 1];
    if (!(b > a)) continue;
    const double half = 0.5 * (b - a), mid = 0.5 * (a + b);
    for (Eigen::Index q = 0; q < nodes.size(); ++q) {
      const RowVectorXd phi = basis.values_at(mid + half * nodes[q]);
      w.noalias() += (half * weights[q]) * phi.transpose() * phi;
    }
  }
  return (w + w.transpose()) / 2.0;
}

}  // namespace fda
