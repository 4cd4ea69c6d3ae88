#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "fda/smoothing.hpp"

namespace fda {

/// Functional K-means result. Labels are 1-based; G is the number of
/// clusters (K is taken by the basis size).
struct ClusterResult {
  int groups = 0;
  std::vector<int> assignments;
  MatrixXd centroid_coeffs;  // G x K
  double inertia = 0.0;
  std::optional<double> silhouette;  // absent for G = 1
  std::uint64_t seed = 0;
  int n_iter = 0;
  /// Inertia after every Lloyd iteration of the winning restart.
  std::vector<double> inertia_trace;
};

struct KMeansOptions {
  int n_restarts = 10;
  int max_iter = 100;
  std::uint64_t seed = 0;
  unsigned threads = 1;
};

/// Squared L2 distance between two curves in coefficient form: (a-c)^T W (a-c).
double l2_distance_squared(const VectorXd& a, const VectorXd& c, const MatrixXd& gram);

/// Lloyd iteration under the W metric with distance-weighted seeding; the
/// best inertia over all restarts wins (earliest restart on ties).
ClusterResult fkmeans(const FunctionalDataSet& ds, int groups, const KMeansOptions& options = {});

/// Mean silhouette under the L2 metric. Singletons contribute 0, and so
/// does a point with a = b = 0.
double silhouette_score(const FunctionalDataSet& ds, const std::vector<int>& assignments);

struct GroupSelection {
  int best_groups = 0;
  std::vector<ClusterResult> results;  // one per G in [g_min, g_max]
};

/// fkmeans for each G in [g_min, g_max]; the largest silhouette wins,
/// smaller G on ties.
GroupSelection select_g(const FunctionalDataSet& ds, int g_min, int g_max, const KMeansOptions& options = {});

}  // namespace fda
