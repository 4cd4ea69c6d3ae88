#include "fda/clustering.hpp"

#include <limits>
#include <random>

#include "fda/parallel.hpp"

namespace fda {

namespace {

double unit_uniform(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

struct Run {
  std::vector<int> labels;  // 0-based
  MatrixXd centers;         // whitened, G x K
  double inertia = 0.0;
  int n_iter = 0;
  std::vector<double> trace;
};

MatrixXd whiten(const FunctionalDataSet& ds) {
  return ds.coefficients() * gram_sqrt(gram_matrix(ds.basis())).sqrt;
}

// Distance-weighted seeding: each new center is drawn with probability
// proportional to the squared distance to the nearest existing center.
MatrixXd seed_centers(const MatrixXd& x, int groups, std::mt19937_64& rng) {
  const Eigen::Index n = x.rows();
  MatrixXd centers(groups, x.cols());
  std::vector<bool> taken(static_cast<std::size_t>(n), false);
  auto first = static_cast<Eigen::Index>(unit_uniform(rng) * static_cast<double>(n));
  first = std::min(first, n - 1);
  centers.row(0) = x.row(first);
  taken[static_cast<std::size_t>(first)] = true;
  VectorXd nearest = (x.rowwise() - x.row(first)).rowwise().squaredNorm();
  for (int g = 1; g < groups; ++g) {
    const double total = nearest.sum();
    Eigen::Index pick = -1;
    if (total > 0.0) {
      const double target = unit_uniform(rng) * total;
      double running = 0.0;
      for (Eigen::Index i = 0; i < n; ++i) {
        if (nearest[i] <= 0.0) continue;
        running += nearest[i];
        pick = i;
        if (running > target) break;
      }
    }
    if (pick < 0) {
      // Every point coincides with a center; fall back to the first unused index.
      for (Eigen::Index i = 0; i < n && pick < 0; ++i)
        if (!taken[static_cast<std::size_t>(i)]) pick = i;
    }
    taken[static_cast<std::size_t>(pick)] = true;
    centers.row(g) = x.row(pick);
    nearest = nearest.cwiseMin((x.rowwise() - x.row(pick)).rowwise().squaredNorm());
  }
  return centers;
}

Run lloyd(const MatrixXd& x, int groups, int max_iter, std::uint64_t stream_seed) {
  const Eigen::Index n = x.rows();
  std::mt19937_64 rng(stream_seed);
  Run run;
  run.centers = seed_centers(x, groups, rng);
  run.labels.assign(static_cast<std::size_t>(n), -1);

  for (int iter = 1; iter <= max_iter; ++iter) {
    std::vector<int> labels(static_cast<std::size_t>(n));
    VectorXd cost(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      const VectorXd d = (run.centers.rowwise() - x.row(i)).rowwise().squaredNorm();
      Eigen::Index best = 0;
      cost[i] = d.minCoeff(&best);
      labels[static_cast<std::size_t>(i)] = static_cast<int>(best);
    }

    // Reseed empty clusters with the point farthest from its centroid.
    std::vector<int> counts(static_cast<std::size_t>(groups), 0);
    for (int label : labels) ++counts[static_cast<std::size_t>(label)];
    for (int g = 0; g < groups; ++g) {
      if (counts[static_cast<std::size_t>(g)] > 0) continue;
      Eigen::Index far = -1;
      for (Eigen::Index i = 0; i < n; ++i) {
        if (counts[static_cast<std::size_t>(labels[static_cast<std::size_t>(i)])] < 2) continue;
        if (far < 0 || cost[i] > cost[far]) far = i;
      }
      if (far < 0) break;
      --counts[static_cast<std::size_t>(labels[static_cast<std::size_t>(far)])];
      labels[static_cast<std::size_t>(far)] = g;
      counts[static_cast<std::size_t>(g)] = 1;
      cost[far] = 0.0;
    }

    MatrixXd centers = MatrixXd::Zero(groups, x.cols());
    for (Eigen::Index i = 0; i < n; ++i) centers.row(labels[static_cast<std::size_t>(i)]) += x.row(i);
    for (int g = 0; g < groups; ++g) {
      if (counts[static_cast<std::size_t>(g)] > 0)
        centers.row(g) /= static_cast<double>(counts[static_cast<std::size_t>(g)]);
      else
        centers.row(g) = run.centers.row(g);
    }

    double inertia = 0.0;
    for (Eigen::Index i = 0; i < n; ++i)
      inertia += (x.row(i) - centers.row(labels[static_cast<std::size_t>(i)])).squaredNorm();

    const bool stable = labels == run.labels;
    run.labels = std::move(labels);
    run.centers = std::move(centers);
    run.inertia = inertia;
    run.trace.push_back(inertia);
    run.n_iter = iter;
    if (stable) break;
  }
  return run;
}

MatrixXd pairwise_distances(const MatrixXd& x) {
  const Eigen::Index n = x.rows();
  MatrixXd d = MatrixXd::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = i + 1; j < n; ++j) d(i, j) = d(j, i) = (x.row(i) - x.row(j)).norm();
  return d;
}

int validate_labels(const std::vector<int>& labels, Eigen::Index n) {
  if (static_cast<Eigen::Index>(labels.size()) != n)
    throw ArgumentError("assignments must have one label per curve");
  int groups = 0;
  for (int label : labels) {
    if (label < 1) throw ArgumentError("cluster labels must be 1-based positive integers");
    groups = std::max(groups, label);
  }
  std::vector<int> counts(static_cast<std::size_t>(groups), 0);
  for (int label : labels) ++counts[static_cast<std::size_t>(label - 1)];
  for (int g = 0; g < groups; ++g)
    if (counts[static_cast<std::size_t>(g)] == 0)
      throw ArgumentError("cluster " + std::to_string(g + 1) + " has no members");
  return groups;
}

double silhouette_from_distances(const MatrixXd& dist, const std::vector<int>& labels, int groups) {
  const Eigen::Index n = dist.rows();
  if (groups < 2) throw ArgumentError("silhouette needs at least two clusters");
  std::vector<int> counts(static_cast<std::size_t>(groups), 0);
  for (int label : labels) ++counts[static_cast<std::size_t>(label - 1)];

  double total = 0.0;
  std::vector<double> sums(static_cast<std::size_t>(groups));
  for (Eigen::Index i = 0; i < n; ++i) {
    const int own = labels[static_cast<std::size_t>(i)] - 1;
    if (counts[static_cast<std::size_t>(own)] == 1) continue;
    std::fill(sums.begin(), sums.end(), 0.0);
    for (Eigen::Index j = 0; j < n; ++j) sums[static_cast<std::size_t>(labels[static_cast<std::size_t>(j)] - 1)] += dist(i, j);
    const double a = sums[static_cast<std::size_t>(own)] / (counts[static_cast<std::size_t>(own)] - 1);
    double b = std::numeric_limits<double>::infinity();
    for (int g = 0; g < groups; ++g) {
      if (g == own) continue;
      b = std::min(b, sums[static_cast<std::size_t>(g)] / counts[static_cast<std::size_t>(g)]);
    }
    const double scale = std::max(a, b);
    if (scale > 0.0) total += (b - a) / scale;
  }
  return total / static_cast<double>(n);
}

}  // namespace

double l2_distance_squared(const VectorXd& a, const VectorXd& c, const MatrixXd& gram) {
  const VectorXd diff = a - c;
  return diff.dot(gram * diff);
}

ClusterResult fkmeans(const FunctionalDataSet& ds, int groups, const KMeansOptions& options) {
  const Eigen::Index n = ds.size();
  if (groups < 1 || groups > n)
    throw ArgumentError("number of clusters must lie in [1, " + std::to_string(n) + "], got " + std::to_string(groups));
  if (options.n_restarts < 1) throw ArgumentError("n_restarts must be positive");
  if (options.max_iter < 1) throw ArgumentError("max_iter must be positive");

  const MatrixXd x = whiten(ds);
  std::vector<Run> runs(static_cast<std::size_t>(options.n_restarts));
  parallel_for(runs.size(), options.threads, [&](std::size_t r) {
    runs[r] = lloyd(x, groups, options.max_iter, derive_seed(options.seed, r));
  });
  std::size_t best = 0;
  for (std::size_t r = 1; r < runs.size(); ++r)
    if (runs[r].inertia < runs[best].inertia) best = r;
  Run& run = runs[best];

  ClusterResult result;
  result.groups = groups;
  result.seed = options.seed;
  result.n_iter = run.n_iter;
  result.inertia = run.inertia;
  result.inertia_trace = std::move(run.trace);
  result.assignments.resize(run.labels.size());
  std::vector<int> counts(static_cast<std::size_t>(groups), 0);
  result.centroid_coeffs = MatrixXd::Zero(groups, ds.basis().size());
  for (std::size_t i = 0; i < run.labels.size(); ++i) {
    result.assignments[i] = run.labels[i] + 1;
    ++counts[static_cast<std::size_t>(run.labels[i])];
    result.centroid_coeffs.row(run.labels[i]) += ds.coefficients().row(static_cast<Eigen::Index>(i));
  }
  for (int g = 0; g < groups; ++g) {
    if (counts[static_cast<std::size_t>(g)] == 0)
      throw NumericalError("fkmeans: cluster " + std::to_string(g + 1) + " ended empty (too many duplicate curves?)");
    result.centroid_coeffs.row(g) /= static_cast<double>(counts[static_cast<std::size_t>(g)]);
  }
  if (groups >= 2) result.silhouette = silhouette_from_distances(pairwise_distances(x), result.assignments, groups);
  return result;
}

double silhouette_score(const FunctionalDataSet& ds, const std::vector<int>& assignments) {
  const int groups = validate_labels(assignments, ds.size());
  return silhouette_from_distances(pairwise_distances(whiten(ds)), assignments, groups);
}

GroupSelection select_g(const FunctionalDataSet& ds, int g_min, int g_max, const KMeansOptions& options) {
  const auto n = static_cast<int>(ds.size());
  if (g_min < 2) throw ArgumentError("g_min must be at least 2");
  if (g_min > g_max) throw ArgumentError("g_min must not exceed g_max");
  if (g_max > n - 1) throw ArgumentError("g_max must not exceed n - 1 = " + std::to_string(n - 1));

  GroupSelection selection;
  for (int g = g_min; g <= g_max; ++g) selection.results.push_back(fkmeans(ds, g, options));
  double best = -std::numeric_limits<double>::infinity();
  for (const auto& result : selection.results) {
    if (*result.silhouette > best) {
      best = *result.silhouette;
      selection.best_groups = result.groups;
    }
  }
  return selection;
}

}  // namespace fda
