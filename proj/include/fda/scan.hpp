#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "fda/smoothing.hpp"

namespace fda {

/// Simplified spatial functional scan.
///
/// This is not the published distribution-free functional spatial scan
/// statistic. A window w is scored by
///   Lambda(w) = max_t |T_w(t)|,
/// where T_w(t) is the Welch two-sample t statistic comparing curve values
/// at t inside w against those outside. Significance comes from permuting
/// which curve sits at which location, keeping the window geometry fixed.

struct Point2 {
  double x = 0.0;
  double y = 0.0;
  bool operator==(const Point2&) const = default;
};

/// Curves with one planar location each. Exact duplicate coordinates are
/// shifted along x by k * 1e-9 for the k-th repeat.
class SpatialFunctionalDataSet {
 public:
  SpatialFunctionalDataSet(FunctionalDataSet ds, std::vector<Point2> coords);

  const FunctionalDataSet& data() const { return ds_; }
  const std::vector<Point2>& coords() const { return coords_; }

 private:
  FunctionalDataSet ds_;
  std::vector<Point2> coords_;
};

/// Nearest-neighbour disc around `center`; members sorted ascending.
struct ScanWindow {
  int center = 0;
  double radius = 0.0;
  std::vector<int> members;
};

/// For every center, the nested sets of its 1..ceil(max_fraction * n)
/// nearest locations (itself first, ties by index), capped at n - 1.
/// Repeated sets are kept once, at their first appearance.
std::vector<ScanWindow> enumerate_windows(std::span<const Point2> coords, double max_fraction);

/// Lambda(w) from an n x T value matrix (rows are locations).
double window_statistic(const MatrixXd& values, std::span<const int> members);
double window_statistic(const SpatialFunctionalDataSet& sds, std::span<const int> members, const EvalGrid& grid);

struct ScanResult {
  std::vector<int> window;
  int center_index = 0;
  double radius = 0.0;
  double statistic = 0.0;
  double p_value = 1.0;
  int n_perm = 0;
  std::uint64_t seed = 0;
  /// Maximum statistic of each permutation replicate.
  std::vector<double> permutation_statistics;
};

struct ScanOptions {
  double max_fraction = 0.5;
  int n_perm = 999;
  std::uint64_t seed = 0;
  unsigned threads = 1;
};

/// Most likely cluster and its Monte Carlo p-value
/// (1 + #{replicates >= observed}) / (1 + n_perm). Only windows with at
/// least two curves on each side are scored.
ScanResult detect_cluster(const SpatialFunctionalDataSet& sds, const EvalGrid& grid, const ScanOptions& options);

/// Default time grid: 101 equispaced points over the basis domain.
EvalGrid default_scan_grid(const BasisSystem& basis);

}  // namespace fda
