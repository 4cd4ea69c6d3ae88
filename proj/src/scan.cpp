#include "fda/scan.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <random>
#include <set>

#include "fda/parallel.hpp"

namespace fda {

namespace {

constexpr double kJitter = 1e-9;
constexpr double kDegenerateScale = 1e-12;

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

double squared_distance(Point2 a, Point2 b) {
  const double dx = a.x - b.x, dy = a.y - b.y;
  return dx * dx + dy * dy;
}

// Locations ordered by distance from `center`, center first, ties by index.
std::vector<int> neighbour_order(std::span<const Point2> coords, int center) {
  std::vector<int> order(coords.size());
  std::iota(order.begin(), order.end(), 0);
  const Point2 c = coords[static_cast<std::size_t>(center)];
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    if (a == center || b == center) return a == center && b != center;
    return squared_distance(coords[static_cast<std::size_t>(a)], c) < squared_distance(coords[static_cast<std::size_t>(b)], c);
  });
  return order;
}

int max_window_size(std::size_t n, double max_fraction) {
  if (!(max_fraction > 0.0 && max_fraction < 1.0)) throw ArgumentError("max_fraction must lie strictly between 0 and 1");
  if (n < 3) throw ArgumentError("spatial scan needs at least 3 locations");
  const auto m = static_cast<int>(std::ceil(max_fraction * static_cast<double>(n)));
  return std::clamp(m, 1, static_cast<int>(n) - 1);
}

/// Centered values plus their squares; Lambda is invariant to the column shift.
struct ScanData {
  RowMatrix values;
  RowMatrix squares;
  Eigen::ArrayXd total_sq;  // column sums of squares (column sums are ~0)
  double degenerate_se2 = 0.0;
};

ScanData prepare(const MatrixXd& raw) {
  ScanData data;
  const double scale = raw.size() ? raw.cwiseAbs().maxCoeff() : 0.0;
  data.degenerate_se2 = (kDegenerateScale * scale) * (kDegenerateScale * scale);
  data.values = raw.rowwise() - raw.colwise().mean();
  data.squares = data.values.array().square().matrix();
  data.total_sq = data.squares.colwise().sum().transpose().array();
  return data;
}

/// max_t |Welch t| from the inside sums; returns -1 when every t is degenerate.
double welch_max(const ScanData& data, const Eigen::ArrayXd& in_sum, const Eigen::ArrayXd& in_sq, int n_in) {
  const auto n = static_cast<double>(data.values.rows());
  const double a = n_in, b = n - n_in;
  double best = -1.0;
  for (Eigen::Index t = 0; t < in_sum.size(); ++t) {
    const double mean_in = in_sum[t] / a;
    const double mean_out = -in_sum[t] / b;
    const double var_in = std::max(0.0, (in_sq[t] - a * mean_in * mean_in) / (a - 1.0));
    const double var_out = std::max(0.0, (data.total_sq[t] - in_sq[t] - b * mean_out * mean_out) / (b - 1.0));
    const double se2 = var_in / a + var_out / b;
    if (se2 <= data.degenerate_se2) continue;
    best = std::max(best, std::abs(mean_in - mean_out) / std::sqrt(se2));
  }
  return best;
}

struct Best {
  double statistic = -1.0;
  int center = -1;
  int size = 0;
};

/// Max of Lambda over all scored windows, with curve perm[k] placed at location k.
Best scan_all(const ScanData& data, const std::vector<std::vector<int>>& orders, int max_size,
              const std::vector<int>& perm) {
  const auto n = static_cast<int>(data.values.rows());
  const Eigen::Index t = data.values.cols();
  Eigen::ArrayXd in_sum(t), in_sq(t);
  Best best;
  for (std::size_t c = 0; c < orders.size(); ++c) {
    in_sum.setZero();
    in_sq.setZero();
    for (int s = 1; s <= max_size; ++s) {
      const int row = perm[static_cast<std::size_t>(orders[c][static_cast<std::size_t>(s - 1)])];
      in_sum += data.values.row(row).transpose().array();
      in_sq += data.squares.row(row).transpose().array();
      if (s < 2 || n - s < 2) continue;
      const double value = welch_max(data, in_sum, in_sq, s);
      if (value < 0.0) throw DataError("scan statistic is degenerate: zero variance inside and outside the window");
      if (value > best.statistic) best = {value, static_cast<int>(c), s};
    }
  }
  return best;
}

double unit_uniform(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

std::vector<int> random_permutation(std::size_t n, std::uint64_t seed) {
  std::vector<int> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  std::mt19937_64 rng(seed);
  for (std::size_t i = n; i > 1; --i) {
    auto j = static_cast<std::size_t>(unit_uniform(rng) * static_cast<double>(i));
    j = std::min(j, i - 1);
    std::swap(perm[i - 1], perm[j]);
  }
  return perm;
}

}  // namespace

SpatialFunctionalDataSet::SpatialFunctionalDataSet(FunctionalDataSet ds, std::vector<Point2> coords)
    : ds_(std::move(ds)), coords_(std::move(coords)) {
  if (static_cast<Eigen::Index>(coords_.size()) != ds_.size())
    throw ArgumentError("need exactly one coordinate pair per curve");
  std::map<std::pair<double, double>, int> repeats;
  for (auto& p : coords_) {
    if (!std::isfinite(p.x) || !std::isfinite(p.y)) throw DataError("coordinates must be finite");
    const int k = repeats[{p.x, p.y}]++;
    p.x += k * kJitter;
  }
}

std::vector<ScanWindow> enumerate_windows(std::span<const Point2> coords, double max_fraction) {
  const int max_size = max_window_size(coords.size(), max_fraction);
  std::vector<ScanWindow> windows;
  std::set<std::vector<int>> seen;
  for (int c = 0; c < static_cast<int>(coords.size()); ++c) {
    const auto order = neighbour_order(coords, c);
    for (int s = 1; s <= max_size; ++s) {
      std::vector<int> members(order.begin(), order.begin() + s);
      std::sort(members.begin(), members.end());
      if (!seen.insert(members).second) continue;
      const double radius = std::sqrt(squared_distance(coords[static_cast<std::size_t>(c)],
                                                       coords[static_cast<std::size_t>(order[static_cast<std::size_t>(s - 1)])]));
      windows.push_back({c, radius, std::move(members)});
    }
  }
  return windows;
}

double window_statistic(const MatrixXd& values, std::span<const int> members) {
  const auto n = static_cast<int>(values.rows());
  std::vector<bool> inside(static_cast<std::size_t>(n), false);
  for (int m : members) {
    if (m < 0 || m >= n) throw ArgumentError("window member index out of range");
    if (inside[static_cast<std::size_t>(m)]) throw ArgumentError("window lists a location twice");
    inside[static_cast<std::size_t>(m)] = true;
  }
  const auto n_in = static_cast<int>(members.size());
  if (n_in < 2 || n - n_in < 2)
    throw ArgumentError("scan statistic is undefined: each side of the window needs at least 2 curves");
  const ScanData data = prepare(values);
  Eigen::ArrayXd in_sum = Eigen::ArrayXd::Zero(values.cols()), in_sq = Eigen::ArrayXd::Zero(values.cols());
  for (int m : members) {
    in_sum += data.values.row(m).transpose().array();
    in_sq += data.squares.row(m).transpose().array();
  }
  const double value = welch_max(data, in_sum, in_sq, n_in);
  if (value < 0.0) throw DataError("scan statistic is degenerate: zero variance inside and outside the window");
  return value;
}

double window_statistic(const SpatialFunctionalDataSet& sds, std::span<const int> members, const EvalGrid& grid) {
  return window_statistic(eval_curves(sds.data(), grid), members);
}

EvalGrid default_scan_grid(const BasisSystem& basis) { return EvalGrid::uniform(basis.domain(), 101); }

ScanResult detect_cluster(const SpatialFunctionalDataSet& sds, const EvalGrid& grid, const ScanOptions& options) {
  if (options.n_perm < 19) throw ArgumentError("n_perm must be at least 19 for p <= 0.05 to be reachable");
  const auto& coords = sds.coords();
  const std::size_t n = coords.size();
  const int max_size = max_window_size(n, options.max_fraction);
  if (std::min(max_size, static_cast<int>(n) - 2) < 2)
    throw ArgumentError("no window has at least two curves on each side; increase n or max_fraction");

  // Geometry is fixed once; every replicate scans these same orders.
  std::vector<std::vector<int>> orders(n);
  for (std::size_t c = 0; c < n; ++c) {
    orders[c] = neighbour_order(coords, static_cast<int>(c));
    orders[c].resize(static_cast<std::size_t>(max_size));
  }
  const ScanData data = prepare(eval_curves(sds.data(), grid));

  std::vector<int> identity(n);
  std::iota(identity.begin(), identity.end(), 0);
  const Best observed = scan_all(data, orders, max_size, identity);

  ScanResult result;
  result.n_perm = options.n_perm;
  result.seed = options.seed;
  result.statistic = observed.statistic;
  result.center_index = observed.center;
  const auto& order = orders[static_cast<std::size_t>(observed.center)];
  result.window.assign(order.begin(), order.begin() + observed.size);
  std::sort(result.window.begin(), result.window.end());
  result.radius = std::sqrt(squared_distance(coords[static_cast<std::size_t>(observed.center)],
                                             coords[static_cast<std::size_t>(order[static_cast<std::size_t>(observed.size - 1)])]));

  result.permutation_statistics.resize(static_cast<std::size_t>(options.n_perm));
  parallel_for(result.permutation_statistics.size(), options.threads, [&](std::size_t r) {
    const auto perm = random_permutation(n, derive_seed(options.seed, r));
    result.permutation_statistics[r] = scan_all(data, orders, max_size, perm).statistic;
  });
  const auto exceed = std::count_if(result.permutation_statistics.begin(), result.permutation_statistics.end(),
                                    [&](double s) { return s >= result.statistic; });
  result.p_value = static_cast<double>(1 + exceed) / static_cast<double>(1 + options.n_perm);
  return result;
}

}  // namespace fda
