#pragma once

#include "genmeter/dataset.hpp"

namespace genmeter {

// predict_proba must return a nonnegative vector summing to 1.
class LabeledClassifier {
 public:
  virtual ~LabeledClassifier() = default;
  virtual std::size_t num_classes() const = 0;
  virtual std::vector<double> predict_proba(std::span<const double> x) const = 0;
};

// Perfect-classifier oracle: one-hot label of the nearest reference row.
// Reference labels are the ground truth of the synthetic sampler.
class NearestLabelClassifier final : public LabeledClassifier {
 public:
  NearestLabelClassifier(Dataset reference, std::size_t num_classes);
  std::size_t num_classes() const override { return num_classes_; }
  std::vector<double> predict_proba(std::span<const double> x) const override;

 private:
  Dataset reference_;
  std::size_t num_classes_;
};

class UniformClassifier final : public LabeledClassifier {
 public:
  explicit UniformClassifier(std::size_t c) : c_(c) {}
  std::size_t num_classes() const override { return c_; }
  std::vector<double> predict_proba(std::span<const double>) const override {
    return std::vector<double>(c_, 1.0 / static_cast<double>(c_));
  }

 private:
  std::size_t c_;
};

// f_is = C - exp(mean_x KL(p(y|x) || p(y))). Lower is better; 0 means the
// label marginal looks uniform while every prediction is confident.
double inception_pseudo_divergence(const LabeledClassifier& clf, const Dataset& dg);

// Squared mean gap plus covariance trace term between moment-matched
// Gaussians (sample means, unbiased sample covariances).
double frechet_distance(const Dataset& dr, const Dataset& dg);

// Symmetric PSD square root via cyclic Jacobi; eigenvalues below 1e-12 are
// treated as zero. Input is symmetrized first.
Matrix matrix_sqrt_psd(const Matrix& m);

struct PrdCurve {
  std::vector<std::pair<double, double>> points;  // (precision, recall)
};

// Precision/recall trade-off curve over an angular lambda grid
// lambda_j = tan(j*pi / (2(L+1))), j = 1..L.
PrdCurve prd_curve(std::span<const double> hist_r, std::span<const double> hist_g,
                   std::size_t num_angles = 1001);

double f_score(const PrdCurve& curve, double beta);

struct KmeansClustering {
  Matrix centers;
  std::vector<std::size_t> assignment;  // in input row order
};

// Seeded k-means++ with a 100-iteration Lloyd cap. Rows are canonically
// sorted before seeding so clustering cannot depend on input row order;
// assignment ties go to the lowest cluster index.
KmeansClustering kmeans_cluster(const Matrix& points, std::size_t k, uint64_t seed);

struct KmeansPrResult {
  double f_beta = 0.0;
  double f_inv_beta = 0.0;
  PrdCurve curve;
};

// Cluster the union, histogram real/fake per cluster, score the histograms.
// Union rows are canonically sorted before clustering so row order of either
// input cannot change the result.
KmeansPrResult kmeans_pr(const Dataset& dr, const Dataset& dg, std::size_t k, double beta,
                         uint64_t seed);

struct KnnManifold {
  Matrix centers;
  std::vector<double> radii;  // distance to the k-th nearest neighbor, self excluded
};

KnnManifold build_knn_manifold(const Dataset& d, std::size_t k);
bool manifold_contains(const KnnManifold& m, std::span<const double> x);

struct PrResult {
  double precision = 0.0;
  double recall = 0.0;
};

// Precision = fraction of dg inside the union of real spheres, recall the
// mirror image. Sphere membership is inclusive.
PrResult knn_pr(const Dataset& dr, const Dataset& dg, std::size_t k);

}  // namespace genmeter
