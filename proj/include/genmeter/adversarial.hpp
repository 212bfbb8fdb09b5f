#pragma once

#include <functional>

#include "genmeter/samplers.hpp"

namespace genmeter {

// The smallest memorized multiset that fools a target metric.
struct MinimalDataset {
  enum class Target { is, kmeans_pr, knn_pr };
  Dataset rows;  // possibly a multiset with duplicates
  std::size_t distinct_count = 0;
  Target target = Target::is;
};

// One training point per class, lowest index first.
MinimalDataset build_dstar_is(const Dataset& labeled_train, std::size_t num_classes);

// Cluster the test set, pick the training point nearest each cluster centroid
// and duplicate it as many times as the cluster holds test points.
MinimalDataset build_dstar_kmeans(const Dataset& train, const Dataset& test, std::size_t k,
                                  uint64_t seed);

// The two training points at maximal pairwise distance.
MinimalDataset build_dstar_knn(const Dataset& train);

std::size_t count_distinct_rows(const Dataset& d);

// k copies of each minimal-dataset row, so that under k-nn PR the k-th
// neighbor of every copy is the other point and the spheres span the full
// max-distance diameter.
Dataset dstar_knn_multiset(const MinimalDataset& dstar, std::size_t k);

using DatasetMetric = std::function<double(const Dataset& test, const Dataset& generated)>;

struct ProbeRow {
  std::size_t size = 0;
  uint64_t seed = 0;
  double value = 0.0;
};

struct ProbeResult {
  std::vector<std::size_t> sizes;
  std::vector<double> mean_values;  // per size, over seeds
  bool strictly_decreasing = false;
  std::vector<ProbeRow> rows;
};

// For each size n: draw disjoint (D_n, D_test) pairs from the sampler and
// evaluate metric(D_test, D_n). Reports per-size means and whether the mean
// sequence strictly decreases.
ProbeResult monotonicity_probe(const DatasetMetric& metric, const SyntheticSampler& sampler,
                               std::size_t m, const std::vector<std::size_t>& sizes, int n_seeds,
                               uint64_t seed, unsigned threads = 0);

}  // namespace genmeter
