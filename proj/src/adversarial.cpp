#include "genmeter/adversarial.hpp"

#include <algorithm>
#include <cstring>
#include <set>

#include "genmeter/metrics_classical.hpp"

namespace genmeter {

std::size_t count_distinct_rows(const Dataset& d) {
  std::set<std::vector<double>> seen;
  for (std::size_t r = 0; r < d.size(); ++r) {
    auto row = d.row(r);
    seen.emplace(row.begin(), row.end());
  }
  return seen.size();
}

MinimalDataset build_dstar_is(const Dataset& labeled_train, std::size_t num_classes) {
  if (!labeled_train.has_labels()) throw input_error("build_dstar_is: training set needs labels");
  std::vector<std::ptrdiff_t> first(num_classes, -1);
  for (std::size_t r = 0; r < labeled_train.size(); ++r) {
    int l = labeled_train.labels[r];
    if (l < 0 || static_cast<std::size_t>(l) >= num_classes)
      throw input_error("build_dstar_is: label out of range");
    if (first[static_cast<std::size_t>(l)] < 0)
      first[static_cast<std::size_t>(l)] = static_cast<std::ptrdiff_t>(r);
  }
  MinimalDataset out;
  out.target = MinimalDataset::Target::is;
  out.rows = Dataset(labeled_train.dim);
  for (std::size_t c = 0; c < num_classes; ++c) {
    if (first[c] < 0)
      throw input_error("build_dstar_is: class " + std::to_string(c) + " missing from labels");
    out.rows.append_row(labeled_train.row(static_cast<std::size_t>(first[c])),
                        static_cast<int>(c));
  }
  out.distinct_count = count_distinct_rows(out.rows);
  return out;
}

MinimalDataset build_dstar_kmeans(const Dataset& train, const Dataset& test, std::size_t k,
                                  uint64_t seed) {
  if (train.size() == 0 || test.size() == 0) throw input_error("build_dstar_kmeans: empty input");
  if (train.dim != test.dim) throw input_error("build_dstar_kmeans: dimension mismatch");
  if (test.size() < k) throw input_error("build_dstar_kmeans: test set smaller than k");

  Matrix pts = test.to_matrix();
  KmeansClustering clusters;
  bool ok = false;
  for (int attempt = 0; attempt < 5 && !ok; ++attempt) {
    clusters = kmeans_cluster(pts, k, attempt == 0 ? seed : Rng::substream(seed, "retry", attempt).next_u64());
    std::vector<std::size_t> counts(k, 0);
    for (std::size_t a : clusters.assignment) ++counts[a];
    ok = std::all_of(counts.begin(), counts.end(), [](std::size_t c) { return c > 0; });
  }
  if (!ok) throw input_error("build_dstar_kmeans: empty cluster after 5 retries");

  // nearest training point per centroid, ties to the lowest index
  std::vector<std::size_t> representative(k, 0);
  for (std::size_t c = 0; c < k; ++c) {
    double best = squared_distance(train.row(0), clusters.centers.row(c));
    std::size_t arg = 0;
    for (std::size_t r = 1; r < train.size(); ++r) {
      double d = squared_distance(train.row(r), clusters.centers.row(c));
      if (d < best) {
        best = d;
        arg = r;
      }
    }
    representative[c] = arg;
  }

  MinimalDataset out;
  out.target = MinimalDataset::Target::kmeans_pr;
  out.rows = Dataset(train.dim);
  for (std::size_t i = 0; i < test.size(); ++i)
    out.rows.append_row(train.row(representative[clusters.assignment[i]]));
  out.distinct_count = count_distinct_rows(out.rows);
  return out;
}

MinimalDataset build_dstar_knn(const Dataset& train) {
  if (train.size() < 2) throw input_error("build_dstar_knn: need at least 2 points");
  double best = -1.0;
  std::size_t bi = 0, bj = 1;
  for (std::size_t i = 0; i < train.size(); ++i) {
    for (std::size_t j = i + 1; j < train.size(); ++j) {
      double d = squared_distance(train.row(i), train.row(j));
      if (d > best) {
        best = d;
        bi = i;
        bj = j;
      }
    }
  }
  if (best <= 0.0) throw input_error("build_dstar_knn: all points identical");
  MinimalDataset out;
  out.target = MinimalDataset::Target::knn_pr;
  out.rows = Dataset(train.dim);
  out.rows.append_row(train.row(bi));
  out.rows.append_row(train.row(bj));
  out.distinct_count = 2;
  return out;
}

Dataset dstar_knn_multiset(const MinimalDataset& dstar, std::size_t k) {
  Dataset fake(dstar.rows.dim);
  for (std::size_t copy = 0; copy < k; ++copy)
    for (std::size_t r = 0; r < dstar.rows.size(); ++r) fake.append_row(dstar.rows.row(r));
  return fake;
}

ProbeResult monotonicity_probe(const DatasetMetric& metric, const SyntheticSampler& sampler,
                               std::size_t m, const std::vector<std::size_t>& sizes, int n_seeds,
                               uint64_t seed, unsigned threads) {
  if (sizes.size() < 2) throw input_error("monotonicity_probe: need at least two sizes");
  for (std::size_t i = 1; i < sizes.size(); ++i)
    if (sizes[i] <= sizes[i - 1])
      throw input_error("monotonicity_probe: sizes must be strictly increasing");
  if (n_seeds < 3) throw input_error("monotonicity_probe: need at least 3 seeds");

  ProbeResult res;
  res.sizes = sizes;
  res.rows.resize(sizes.size() * static_cast<std::size_t>(n_seeds));
  std::vector<std::function<void()>> jobs;
  for (std::size_t si = 0; si < sizes.size(); ++si) {
    for (int s = 0; s < n_seeds; ++s) {
      std::size_t slot = si * static_cast<std::size_t>(n_seeds) + static_cast<std::size_t>(s);
      jobs.push_back([&, si, s, slot] {
        uint64_t job_seed =
            Rng::substream(seed, "probe", sizes[si] * 1000003ULL + static_cast<uint64_t>(s))
                .next_u64();
        auto [dn, dtest] = split_disjoint(sampler, sizes[si], m, job_seed);
        res.rows[slot] = {sizes[si], job_seed, metric(dtest, dn)};
      });
    }
  }
  run_parallel(std::move(jobs), threads);

  res.mean_values.assign(sizes.size(), 0.0);
  for (std::size_t si = 0; si < sizes.size(); ++si) {
    for (int s = 0; s < n_seeds; ++s)
      res.mean_values[si] += res.rows[si * static_cast<std::size_t>(n_seeds) + s].value;
    res.mean_values[si] /= static_cast<double>(n_seeds);
  }
  res.strictly_decreasing = true;
  for (std::size_t si = 1; si < sizes.size(); ++si)
    if (!(res.mean_values[si] < res.mean_values[si - 1])) res.strictly_decreasing = false;
  return res;
}

}  // namespace genmeter
