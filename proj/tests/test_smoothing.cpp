#include <doctest.h>

#include "support.hpp"

using namespace fda;
using fda::testing::linspace;

namespace {

RawCurve curve_from(const std::string& id, const BasisSystem& basis, const VectorXd& a, std::vector<double> times) {
  const MatrixXd phi = evaluate(basis, std::span<const double>(times));
  const VectorXd x = phi * a;
  return {id, std::move(times), std::vector<double>(x.data(), x.data() + x.size())};
}

double penalized_rss(const RawCurve& c, const BasisSystem& basis, const VectorXd& a, double ridge) {
  const MatrixXd phi = evaluate(basis, std::span<const double>(c.times));
  const VectorXd r = Eigen::Map<const VectorXd>(c.values.data(), static_cast<Eigen::Index>(c.values.size())) - phi * a;
  return r.squaredNorm() + ridge * a.squaredNorm();
}

}  // namespace

TEST_CASE("constant observations are reproduced exactly by B-splines") {
  const auto basis = BasisSystem::bspline(10, 4, {0.0, 2.0});
  RawCurve c{"const", linspace(0.0, 2.0, 40), std::vector<double>(40, 3.25)};
  const VectorXd a = fit_coefficients(c, basis);
  const MatrixXd phi = evaluate(basis, EvalGrid::uniform(basis.domain(), 333));
  CHECK(((phi * a).array() - 3.25).abs().maxCoeff() <= 1e-10);
}

TEST_CASE("noiseless generate-then-fit round trip recovers coefficients") {
  std::mt19937_64 rng(21);
  const auto basis = BasisSystem::bspline(12, 4, {0.0, 1.0});
  for (int trial = 0; trial < 5; ++trial) {
    const VectorXd truth = fda::testing::random_matrix(12, 1, rng);
    std::vector<double> times;
    for (int l = 0; l < 60; ++l) times.push_back(fda::testing::uniform01(rng));
    std::sort(times.begin(), times.end());
    const auto c = curve_from("x", basis, truth, times);
    const VectorXd a = fit_coefficients(c, basis);
    CHECK((a - truth).norm() <= 1e-8 * truth.norm());
  }
}

TEST_CASE("underdetermined and sparse designs raise a rank error naming the curve") {
  const auto basis = BasisSystem::bspline(8, 4, {0.0, 1.0});
  RawCurve few{"short-one", linspace(0.0, 1.0, 7), std::vector<double>(7, 1.0)};
  CHECK_THROWS_AS(fit_coefficients(few, basis), RankError);
  try {
    fit_coefficients(few, basis);
  } catch (const RankError& e) {
    CHECK(std::string(e.what()).find("short-one") != std::string::npos);
  }
  // Enough points, but all in the first half: some B-splines are never observed.
  RawCurve clumped{"clumped", linspace(0.0, 0.4, 30), std::vector<double>(30, 1.0)};
  CHECK_THROWS_AS(fit_coefficients(clumped, basis), RankError);
  // A ridge penalty makes both solvable.
  CHECK(fit_coefficients(few, basis, 1e-3).allFinite());
  CHECK(fit_coefficients(clumped, basis, 1e-3).allFinite());
}

TEST_CASE("times outside the domain are domain errors") {
  const auto basis = BasisSystem::bspline(6, 4, {0.0, 1.0});
  RawCurve c{"oops", {0.0, 0.2, 0.4, 0.6, 0.8, 1.0, 1.2}, std::vector<double>(7, 0.0)};
  CHECK_THROWS_AS(fit_coefficients(c, basis), DomainError);
}

TEST_CASE("fitted coefficients are optimal for the penalized criterion") {
  std::mt19937_64 rng(8);
  const auto basis = BasisSystem::bspline(9, 4, {0.0, 1.0});
  for (double ridge : {0.0, 0.05}) {
    for (int trial = 0; trial < 5; ++trial) {
      RawCurve c{"r", linspace(0.0, 1.0, 30), {}};
      for (int l = 0; l < 30; ++l) c.values.push_back(std::sin(6.0 * c.times[static_cast<std::size_t>(l)]) + 0.3 * fda::testing::normal(rng));
      const VectorXd a = fit_coefficients(c, basis, ridge);
      const double base = penalized_rss(c, basis, a, ridge);
      for (int dir = 0; dir < 10; ++dir) {
        VectorXd step = fda::testing::random_matrix(9, 1, rng);
        step *= 1e-4 / step.norm();
        CHECK(penalized_rss(c, basis, a + step, ridge) >= base);
        CHECK(penalized_rss(c, basis, a - step, ridge) >= base);
      }
    }
  }
}

TEST_CASE("least-squares fitting is linear in the observations") {
  std::mt19937_64 rng(9);
  const auto basis = BasisSystem::bspline(7, 4, {0.0, 1.0});
  const auto times = linspace(0.0, 1.0, 25);
  RawCurve x1{"a", times, {}}, x2{"b", times, {}}, mix{"m", times, {}};
  for (std::size_t l = 0; l < times.size(); ++l) {
    x1.values.push_back(fda::testing::normal(rng));
    x2.values.push_back(fda::testing::normal(rng));
    mix.values.push_back(2.0 * x1.values[l] - 0.5 * x2.values[l]);
  }
  const VectorXd a1 = fit_coefficients(x1, basis), a2 = fit_coefficients(x2, basis), am = fit_coefficients(mix, basis);
  CHECK((am - (2.0 * a1 - 0.5 * a2)).norm() <= 1e-8);
}

TEST_CASE("build_dataset") {
  std::mt19937_64 rng(12);
  const auto basis = BasisSystem::bspline(8, 4, {0.0, 1.0});
  const MatrixXd truth = fda::testing::random_matrix(20, 8, rng);
  std::vector<RawCurve> curves;
  for (int i = 0; i < 20; ++i) {
    // Irregular per-curve times.
    std::vector<double> times;
    const int l = 30 + i;
    for (int j = 0; j < l; ++j) times.push_back((j + 0.5 * fda::testing::uniform01(rng)) / l);
    curves.push_back(curve_from("id" + std::to_string(i), basis, truth.row(i).transpose(), times));
  }

  SUBCASE("round trip of 20 noiseless curves") {
    const auto ds = build_dataset(curves, basis);
    CHECK(ds.size() == 20);
    CHECK((ds.coefficients() - truth).cwiseAbs().maxCoeff() <= 1e-8 * truth.cwiseAbs().maxCoeff());
    CHECK(ds.ids()[3] == "id3");

    // Resampling at the original times reproduces the raw values.
    for (std::size_t i = 0; i < curves.size(); ++i) {
      const auto one = ds.subset(std::vector<Eigen::Index>{static_cast<Eigen::Index>(i)});
      const MatrixXd x = eval_curves(one, EvalGrid(curves[i].times));
      for (std::size_t l = 0; l < curves[i].times.size(); ++l)
        CHECK(std::abs(x(0, static_cast<Eigen::Index>(l)) - curves[i].values[l]) <= 1e-8);
    }
  }
  SUBCASE("parallel fitting gives identical coefficients") {
    const auto serial = build_dataset(curves, basis, 0.0, 1);
    const auto parallel = build_dataset(curves, basis, 0.0, 4);
    CHECK(serial.coefficients() == parallel.coefficients());
  }
  SUBCASE("permutation equivariance") {
    std::vector<RawCurve> reversed(curves.rbegin(), curves.rend());
    const auto a = build_dataset(curves, basis);
    const auto b = build_dataset(reversed, basis);
    CHECK(a.coefficients() == b.coefficients().colwise().reverse());
  }
  SUBCASE("identical copies give identical rows") {
    std::vector<RawCurve> copies(5, curves[0]);
    for (int i = 0; i < 5; ++i) copies[static_cast<std::size_t>(i)].id = "copy" + std::to_string(i);
    const auto ds = build_dataset(copies, basis);
    for (int i = 1; i < 5; ++i) CHECK(ds.coefficients().row(i) == ds.coefficients().row(0));
  }
  SUBCASE("errors carry the curve id") {
    auto bad = curves;
    bad[7].times.resize(3);
    bad[7].values.resize(3);
    CHECK_THROWS_WITH_AS(build_dataset(bad, basis), doctest::Contains("id7"), RankError);
  }
  SUBCASE("empty input") { CHECK_THROWS_AS(build_dataset(std::vector<RawCurve>{}, basis), ArgumentError); }
}

TEST_CASE("eval_curves") {
  const auto basis = BasisSystem::bspline(6, 4, {0.0, 1.0});
  SUBCASE("constant curves") {
    std::vector<RawCurve> curves;
    for (int i = 0; i < 3; ++i) curves.push_back({"k" + std::to_string(i), linspace(0.0, 1.0, 20), std::vector<double>(20, -1.5)});
    const auto ds = build_dataset(curves, basis);
    CHECK((eval_curves(ds, EvalGrid::uniform(basis.domain(), 51)).array() + 1.5).abs().maxCoeff() <= 1e-10);
  }
  SUBCASE("single midpoint equals the dot product") {
    MatrixXd a(1, 6);
    a << 1, -2, 3, 0.5, 0.25, 4;
    const FunctionalDataSet ds(basis, a, {"only"});
    const MatrixXd x = eval_curves(ds, EvalGrid({0.5}));
    CHECK(x(0, 0) == doctest::Approx(basis.values_at(0.5).dot(a.row(0))).epsilon(1e-15));
  }
  SUBCASE("domain error") {
    const FunctionalDataSet ds(basis, MatrixXd::Ones(1, 6), {"only"});
    CHECK_THROWS_AS(eval_curves(ds, EvalGrid({0.5, 1.5})), DomainError);
  }
}

TEST_CASE("dataset invariants") {
  const auto basis = BasisSystem::bspline(5, 4, {0.0, 1.0});
  CHECK_THROWS_AS(FunctionalDataSet(basis, MatrixXd::Zero(2, 4), {"a", "b"}), ArgumentError);
  CHECK_THROWS_AS(FunctionalDataSet(basis, MatrixXd::Zero(2, 5), {"a", "a"}), DataError);
  CHECK_THROWS_AS(FunctionalDataSet(basis, MatrixXd::Zero(0, 5), {}), ArgumentError);
}
