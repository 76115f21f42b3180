#pragma once

#include <Eigen/Core>

#include <vector>

namespace gapsense {

using ValuesRef = Eigen::Ref<const Eigen::VectorXd>;

/// Exact 1-D 2-means. `high[i]` is true for members of the higher-mean cluster.
struct TwoMeansResult {
    std::vector<bool> high;
    double threshold = 0.0; ///< midpoint between the largest low and smallest high value
    double sse = 0.0;
    bool degenerate = false; ///< fewer than two distinct values
};

/// Sweeps every split of the sorted values and keeps the one with minimum
/// within-cluster sum of squares. Deterministic and globally optimal in 1-D.
TwoMeansResult two_means_1d(const ValuesRef& values);

struct KMeansResult {
    /// Cluster id per value; ids are ordered by ascending cluster mean.
    std::vector<int> labels;
    Eigen::VectorXd centers;
    int k = 0;
    int iterations = 0;
};

/// Lloyd's algorithm in 1-D started from the (i + 0.5)/k quantiles.
/// Empty clusters are dropped, so `k` may come back smaller than requested.
KMeansResult kmeans_1d(const ValuesRef& values, int k, int max_iterations = 300);

/// Per-point silhouette for a 1-D clustering. Points in singleton clusters get 0.
Eigen::VectorXd silhouette_1d(const ValuesRef& values, const std::vector<int>& labels);

/// Mean silhouette; -1 when fewer than two clusters are populated.
double mean_silhouette_1d(const ValuesRef& values, const std::vector<int>& labels);

} // namespace gapsense
