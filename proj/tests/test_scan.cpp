#include <doctest.h>

#include <set>

#include "support.hpp"

using namespace fda;
using namespace fda::testing;

namespace {

// Direct Welch statistic, maximized over columns.
double welch_oracle(const MatrixXd& values, const std::vector<int>& members) {
  std::vector<bool> inside(static_cast<std::size_t>(values.rows()), false);
  for (int m : members) inside[static_cast<std::size_t>(m)] = true;
  double best = 0.0;
  for (Eigen::Index t = 0; t < values.cols(); ++t) {
    std::vector<double> in, out;
    for (Eigen::Index i = 0; i < values.rows(); ++i) (inside[static_cast<std::size_t>(i)] ? in : out).push_back(values(i, t));
    auto moments = [](const std::vector<double>& v) {
      double mean = 0.0;
      for (double x : v) mean += x;
      mean /= static_cast<double>(v.size());
      double ss = 0.0;
      for (double x : v) ss += (x - mean) * (x - mean);
      return std::pair{mean, ss / static_cast<double>(v.size() - 1)};
    };
    const auto [m1, v1] = moments(in);
    const auto [m2, v2] = moments(out);
    best = std::max(best, std::abs(m1 - m2) / std::sqrt(v1 / static_cast<double>(in.size()) + v2 / static_cast<double>(out.size())));
  }
  return best;
}

struct Field {
  SpatialFunctionalDataSet sds;
  std::vector<int> cluster;  // sorted
};

// n random curves at uniform random locations; the `size` nearest neighbours
// of location 0 (itself included) are shifted up by `shift`.
Field make_field(int n, std::uint64_t seed, double shift, int size = 8) {
  auto ds = random_bspline_dataset(n, 8, seed);
  std::mt19937_64 rng(seed + 1000);
  std::vector<Point2> coords;
  for (int i = 0; i < n; ++i) coords.push_back({uniform01(rng), uniform01(rng)});
  std::vector<int> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  auto d2 = [&](int i) { return std::pow(coords[static_cast<std::size_t>(i)].x - coords[0].x, 2) + std::pow(coords[static_cast<std::size_t>(i)].y - coords[0].y, 2); };
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return d2(a) < d2(b); });
  std::vector<int> cluster(order.begin(), order.begin() + size);
  std::sort(cluster.begin(), cluster.end());
  MatrixXd coefs = ds.coefficients();
  // B-splines sum to one, so adding a constant to every coefficient shifts the curve.
  for (int i : cluster) coefs.row(i).array() += shift;
  return {SpatialFunctionalDataSet(FunctionalDataSet(ds.basis(), coefs, ds.ids()), coords), cluster};
}

double overlap(const std::vector<int>& a, const std::vector<int>& b) {
  std::vector<int> common;
  std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(common));
  return static_cast<double>(common.size()) / static_cast<double>(std::max(a.size(), b.size()));
}

}  // namespace

TEST_CASE("window enumeration on three collinear points") {
  const std::vector<Point2> pts{{0, 0}, {1, 0}, {2, 0}};
  for (double f : {0.5, 0.9}) {
    const auto windows = enumerate_windows(pts, f);
    std::set<std::vector<int>> sets;
    for (const auto& w : windows) sets.insert(w.members);
    CHECK(windows.size() == 5);
    CHECK(sets == std::set<std::vector<int>>{{0}, {1}, {2}, {0, 1}, {1, 2}});
  }
  CHECK_THROWS_AS(enumerate_windows(pts, 0.0), ArgumentError);
  CHECK_THROWS_AS(enumerate_windows(pts, 1.0), ArgumentError);
  CHECK_THROWS_AS(enumerate_windows(std::vector<Point2>{{0, 0}, {1, 1}}, 0.5), ArgumentError);
}

TEST_CASE("window enumeration invariants on random layouts") {
  std::mt19937_64 rng(1);
  for (int trial = 0; trial < 5; ++trial) {
    const int n = 10 + 7 * trial;
    std::vector<Point2> pts;
    for (int i = 0; i < n; ++i) pts.push_back({uniform01(rng), uniform01(rng)});
    const double f = 0.2 + 0.15 * trial;
    const auto windows = enumerate_windows(pts, f);
    const auto cap = std::min(static_cast<std::size_t>(std::ceil(f * n)), static_cast<std::size_t>(n - 1));
    std::set<std::vector<int>> sets;
    for (const auto& w : windows) {
      CHECK(w.members.size() >= 1);
      CHECK(w.members.size() <= cap);
      CHECK(std::is_sorted(w.members.begin(), w.members.end()));
      CHECK(std::binary_search(w.members.begin(), w.members.end(), w.center));
      // Disc property: members are within the radius, non-members are not strictly inside.
      for (int i = 0; i < n; ++i) {
        const double d = std::hypot(pts[static_cast<std::size_t>(i)].x - pts[static_cast<std::size_t>(w.center)].x,
                                    pts[static_cast<std::size_t>(i)].y - pts[static_cast<std::size_t>(w.center)].y);
        if (std::binary_search(w.members.begin(), w.members.end(), i))
          CHECK(d <= w.radius + 1e-15);
        else
          CHECK(d >= w.radius - 1e-15);
      }
      CHECK(sets.insert(w.members).second);
    }
    // Every singleton appears.
    for (int i = 0; i < n; ++i) CHECK(sets.count({i}) == 1);
  }
}

TEST_CASE("window statistic matches the direct Welch oracle") {
  std::mt19937_64 rng(2);
  const MatrixXd values = random_matrix(15, 30, rng);
  for (int trial = 0; trial < 10; ++trial) {
    std::vector<int> members;
    for (int i = 0; i < 15; ++i)
      if (uniform01(rng) < 0.4) members.push_back(i);
    if (members.size() < 2 || members.size() > 13) continue;
    CHECK(window_statistic(values, members) == doctest::Approx(welch_oracle(values, members)).epsilon(1e-10));
  }
}

TEST_CASE("window statistic symmetries") {
  std::mt19937_64 rng(3);
  const MatrixXd values = random_matrix(12, 20, rng);
  const std::vector<int> w{1, 4, 5, 9};
  std::vector<int> complement;
  for (int i = 0; i < 12; ++i)
    if (!std::binary_search(w.begin(), w.end(), i)) complement.push_back(i);
  const double base = window_statistic(values, w);
  CHECK(window_statistic(values, complement) == doctest::Approx(base).epsilon(1e-12));

  // Adding a common function of t to every curve changes nothing.
  const RowVectorXd offset = 100.0 * random_matrix(1, 20, rng);
  CHECK(std::abs(window_statistic(values.rowwise() + offset, w) - base) <= 1e-10 * base);
  // Nor does a common positive rescaling.
  CHECK(window_statistic(3.0 * values, w) == doctest::Approx(base).epsilon(1e-12));
}

TEST_CASE("window statistic preconditions") {
  std::mt19937_64 rng(4);
  const MatrixXd values = random_matrix(6, 5, rng);
  CHECK_THROWS_AS(window_statistic(values, std::vector<int>{2}), ArgumentError);
  CHECK_THROWS_AS(window_statistic(values, std::vector<int>{0, 1, 2, 3, 4}), ArgumentError);
  CHECK_THROWS_AS(window_statistic(values, std::vector<int>{0, 0, 1}), ArgumentError);
  CHECK_THROWS_AS(window_statistic(values, std::vector<int>{0, 7}), ArgumentError);
  const MatrixXd flat = RowVectorXd(random_matrix(1, 5, rng)).replicate(6, 1);
  CHECK_THROWS_AS(window_statistic(flat, std::vector<int>{0, 1, 2}), DataError);
}

TEST_CASE("identical curves make the scan degenerate") {
  const auto basis = BasisSystem::bspline(6, 4, {0.0, 1.0});
  std::vector<Point2> coords;
  for (int i = 0; i < 10; ++i) coords.push_back({static_cast<double>(i), 0.0});
  const SpatialFunctionalDataSet sds(FunctionalDataSet(basis, MatrixXd::Ones(10, 6), make_ids(10)), coords);
  CHECK_THROWS_AS(detect_cluster(sds, default_scan_grid(basis), {.n_perm = 19}), DataError);
}

TEST_CASE("scan options are validated") {
  const auto field = make_field(12, 5, 0.0);
  const auto grid = default_scan_grid(field.sds.data().basis());
  CHECK_THROWS_AS(detect_cluster(field.sds, grid, {.n_perm = 10}), ArgumentError);
  CHECK_THROWS_AS(detect_cluster(field.sds, grid, {.max_fraction = 1.5, .n_perm = 19}), ArgumentError);
  CHECK_THROWS_AS(detect_cluster(field.sds, grid, {.max_fraction = 0.05, .n_perm = 19}), ArgumentError);
  const auto ds = random_bspline_dataset(3, 6, 6);
  CHECK_THROWS_AS(SpatialFunctionalDataSet(ds, {{0, 0}, {1, 1}}), ArgumentError);
}

TEST_CASE("duplicate coordinates are separated by a tiny jitter") {
  const auto ds = random_bspline_dataset(4, 6, 7);
  const SpatialFunctionalDataSet sds(ds, {{1, 1}, {1, 1}, {2, 2}, {1, 1}});
  CHECK(sds.coords()[0].x == 1.0);
  CHECK(sds.coords()[1].x == 1.0 + 1e-9);
  CHECK(sds.coords()[3].x == 1.0 + 2e-9);
  CHECK(sds.coords()[2].x == 2.0);
  CHECK(sds.coords()[1].y == 1.0);
}

TEST_CASE("detected cluster is the highest-scoring enumerated window") {
  const auto field = make_field(20, 8, 0.0);
  const auto grid = default_scan_grid(field.sds.data().basis());
  const auto result = detect_cluster(field.sds, grid, {.n_perm = 19, .seed = 1});
  const MatrixXd values = eval_curves(field.sds.data(), grid);
  double best = 0.0;
  for (const auto& w : enumerate_windows(field.sds.coords(), 0.5))
    if (w.members.size() >= 2 && w.members.size() <= 18) best = std::max(best, welch_oracle(values, w.members));
  CHECK(result.statistic == doctest::Approx(best).epsilon(1e-10));
  CHECK(result.statistic == doctest::Approx(welch_oracle(values, result.window)).epsilon(1e-10));
  CHECK(std::binary_search(result.window.begin(), result.window.end(), result.center_index));
  CHECK(result.p_value >= 1.0 / 20.0);
  CHECK(result.p_value <= 1.0);
  CHECK(result.permutation_statistics.size() == 19);
  const auto exceed = std::count_if(result.permutation_statistics.begin(), result.permutation_statistics.end(),
                                    [&](double s) { return s >= result.statistic; });
  CHECK(result.p_value == doctest::Approx((1.0 + exceed) / 20.0));
}

TEST_CASE("a shifted cluster is found") {
  int hits = 0;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto field = make_field(30, 100 + seed, 10.0);
    const auto result = detect_cluster(field.sds, default_scan_grid(field.sds.data().basis()), {.n_perm = 99, .seed = seed});
    if (result.p_value <= 0.05 && overlap(result.window, field.cluster) >= 0.8) ++hits;
  }
  CHECK(hits >= 9);
}

TEST_CASE("scan is deterministic and thread-count independent") {
  const auto field = make_field(25, 9, 1.0);
  const auto grid = default_scan_grid(field.sds.data().basis());
  const auto a = detect_cluster(field.sds, grid, {.n_perm = 199, .seed = 42, .threads = 1});
  const auto b = detect_cluster(field.sds, grid, {.n_perm = 199, .seed = 42, .threads = 1});
  const auto c = detect_cluster(field.sds, grid, {.n_perm = 199, .seed = 42, .threads = 4});
  CHECK(a.permutation_statistics == b.permutation_statistics);
  CHECK(a.permutation_statistics == c.permutation_statistics);
  CHECK(a.p_value == c.p_value);
  CHECK(a.window == c.window);
  const auto d = detect_cluster(field.sds, grid, {.n_perm = 199, .seed = 43});
  CHECK(a.permutation_statistics != d.permutation_statistics);
  CHECK(a.statistic == d.statistic);
}

TEST_CASE("adding a common function to every curve leaves the scan unchanged") {
  const auto field = make_field(20, 10, 2.0);
  const auto& ds = field.sds.data();
  std::mt19937_64 rng(11);
  const RowVectorXd common = 50.0 * random_matrix(1, ds.basis().size(), rng);
  const SpatialFunctionalDataSet moved(FunctionalDataSet(ds.basis(), ds.coefficients().rowwise() + common, ds.ids()),
                                       field.sds.coords());
  const auto grid = default_scan_grid(ds.basis());
  const auto a = detect_cluster(field.sds, grid, {.n_perm = 49, .seed = 3});
  const auto b = detect_cluster(moved, grid, {.n_perm = 49, .seed = 3});
  CHECK(std::abs(a.statistic - b.statistic) <= 1e-10 * a.statistic);
  CHECK(a.window == b.window);
  CHECK(a.p_value == b.p_value);
}
