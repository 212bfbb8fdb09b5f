#include "genmeter/metrics_classical.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace genmeter {

// ---- classifiers ----

NearestLabelClassifier::NearestLabelClassifier(Dataset reference, std::size_t num_classes)
    : reference_(std::move(reference)), num_classes_(num_classes) {
  if (!reference_.has_labels()) throw config_error("NearestLabelClassifier: reference needs labels");
  for (int l : reference_.labels)
    if (l < 0 || static_cast<std::size_t>(l) >= num_classes_)
      throw config_error("NearestLabelClassifier: label out of range");
}

std::vector<double> NearestLabelClassifier::predict_proba(std::span<const double> x) const {
  std::size_t best = 0;
  double best_d = squared_distance(x, reference_.row(0));
  for (std::size_t r = 1; r < reference_.size(); ++r) {
    double d = squared_distance(x, reference_.row(r));
    if (d < best_d) {
      best_d = d;
      best = r;
    }
  }
  std::vector<double> p(num_classes_, 0.0);
  p[static_cast<std::size_t>(reference_.labels[best])] = 1.0;
  return p;
}

// ---- inception pseudo divergence ----

double inception_pseudo_divergence(const LabeledClassifier& clf, const Dataset& dg) {
  if (dg.size() == 0) throw input_error("inception_pseudo_divergence: empty dataset");
  const std::size_t c = clf.num_classes();
  const std::size_t n = dg.size();
  std::vector<std::vector<double>> preds(n);
  std::vector<double> py(c, 0.0);
  for (std::size_t r = 0; r < n; ++r) {
    preds[r] = clf.predict_proba(dg.row(r));
    if (preds[r].size() != c)
      throw config_error("classifier output width does not match num_classes");
    for (std::size_t j = 0; j < c; ++j) py[j] += preds[r][j];
  }
  for (double& v : py) v /= static_cast<double>(n);
  double kl = 0.0;
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t j = 0; j < c; ++j) {
      double p = preds[r][j];
      if (p > 0.0) kl += p * std::log(p / py[j]);
    }
  }
  kl /= static_cast<double>(n);
  return static_cast<double>(c) - std::exp(kl);
}

// ---- Frechet distance ----

static std::vector<double> column_means(const Dataset& d) {
  std::vector<double> mu(d.dim, 0.0);
  for (std::size_t r = 0; r < d.size(); ++r) {
    auto row = d.row(r);
    for (std::size_t c = 0; c < d.dim; ++c) mu[c] += row[c];
  }
  for (double& v : mu) v /= static_cast<double>(d.size());
  return mu;
}

static Matrix covariance(const Dataset& d, const std::vector<double>& mu) {
  Matrix cov(d.dim, d.dim);
  for (std::size_t r = 0; r < d.size(); ++r) {
    auto row = d.row(r);
    for (std::size_t i = 0; i < d.dim; ++i) {
      double di = row[i] - mu[i];
      for (std::size_t j = i; j < d.dim; ++j) cov.at(i, j) += di * (row[j] - mu[j]);
    }
  }
  double denom = static_cast<double>(d.size() - 1);
  for (std::size_t i = 0; i < d.dim; ++i)
    for (std::size_t j = i; j < d.dim; ++j) {
      cov.at(i, j) /= denom;
      cov.at(j, i) = cov.at(i, j);
    }
  return cov;
}

// Cyclic Jacobi eigendecomposition of a symmetric matrix.
static void jacobi_eigh(Matrix a, std::vector<double>& eigvals, Matrix& v) {
  const std::size_t n = a.rows;
  v = Matrix::identity(n);
  double scale = frobenius_norm(a);
  if (scale == 0.0) scale = 1.0;
  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (std::size_t p = 0; p < n; ++p)
      for (std::size_t q = p + 1; q < n; ++q) off += a.at(p, q) * a.at(p, q);
    if (std::sqrt(off) < 1e-14 * scale) break;
    for (std::size_t p = 0; p < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        double apq = a.at(p, q);
        if (std::abs(apq) < 1e-300) continue;
        double theta = (a.at(q, q) - a.at(p, p)) / (2.0 * apq);
        double t = (theta >= 0.0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        double c = 1.0 / std::sqrt(t * t + 1.0);
        double s = t * c;
        for (std::size_t i = 0; i < n; ++i) {
          double aip = a.at(i, p), aiq = a.at(i, q);
          a.at(i, p) = c * aip - s * aiq;
          a.at(i, q) = s * aip + c * aiq;
        }
        for (std::size_t i = 0; i < n; ++i) {
          double api = a.at(p, i), aqi = a.at(q, i);
          a.at(p, i) = c * api - s * aqi;
          a.at(q, i) = s * api + c * aqi;
        }
        for (std::size_t i = 0; i < n; ++i) {
          double vip = v.at(i, p), viq = v.at(i, q);
          v.at(i, p) = c * vip - s * viq;
          v.at(i, q) = s * vip + c * viq;
        }
      }
    }
  }
  eigvals.resize(n);
  for (std::size_t i = 0; i < n; ++i) eigvals[i] = a.at(i, i);
}

Matrix matrix_sqrt_psd(const Matrix& m) {
  if (m.rows != m.cols) throw input_error("matrix_sqrt_psd: matrix must be square");
  const std::size_t n = m.rows;
  Matrix sym(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) sym.at(i, j) = 0.5 * (m.at(i, j) + m.at(j, i));
  std::vector<double> eig;
  Matrix v;
  jacobi_eigh(sym, eig, v);
  for (double& e : eig) e = e < 1e-12 ? 0.0 : std::sqrt(e);
  // S = V diag(sqrt(eig)) V^T
  Matrix vs(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) vs.at(i, j) = v.at(i, j) * eig[j];
  return matmul_bt(vs, v);
}

double frechet_distance(const Dataset& dr, const Dataset& dg) {
  if (dr.size() == 0 || dg.size() == 0) throw input_error("frechet_distance: empty dataset");
  if (dr.dim != dg.dim) throw input_error("frechet_distance: dimension mismatch");
  if (dr.size() < 2 || dg.size() < 2)
    throw input_error("frechet_distance: need at least 2 rows per dataset");
  auto mu_r = column_means(dr);
  auto mu_g = column_means(dg);
  Matrix cov_r = covariance(dr, mu_r);
  Matrix cov_g = covariance(dg, mu_g);
  double mean_term = 0.0;
  for (std::size_t i = 0; i < dr.dim; ++i) {
    double d = mu_r[i] - mu_g[i];
    mean_term += d * d;
  }
  Matrix s_r = matrix_sqrt_psd(cov_r);
  Matrix inner = matmul(matmul(s_r, cov_g), s_r);
  Matrix cross = matrix_sqrt_psd(inner);
  double trace_term = 0.0;
  for (std::size_t i = 0; i < dr.dim; ++i)
    trace_term += cov_r.at(i, i) + cov_g.at(i, i) - 2.0 * cross.at(i, i);
  if (trace_term < 0.0) trace_term = 0.0;
  return mean_term + trace_term;
}

// ---- PRD curve and F-scores ----

PrdCurve prd_curve(std::span<const double> hist_r, std::span<const double> hist_g,
                   std::size_t num_angles) {
  if (hist_r.size() != hist_g.size()) throw input_error("prd_curve: histogram length mismatch");
  if (num_angles < 1) throw input_error("prd_curve: need at least one angle");
  auto check_hist = [](std::span<const double> h, const char* name) {
    double s = std::accumulate(h.begin(), h.end(), 0.0);
    if (std::abs(s - 1.0) > 1e-9)
      throw input_error(std::string("prd_curve: ") + name + " histogram must sum to 1");
  };
  check_hist(hist_r, "real");
  check_hist(hist_g, "generated");
  PrdCurve curve;
  curve.points.reserve(num_angles);
  const double denom = 2.0 * static_cast<double>(num_angles + 1);
  for (std::size_t j = 1; j <= num_angles; ++j) {
    double lambda = std::tan(static_cast<double>(j) * M_PI / denom);
    double precision = 0.0, recall = 0.0;
    for (std::size_t i = 0; i < hist_r.size(); ++i) {
      precision += std::min(lambda * hist_r[i], hist_g[i]);
      recall += std::min(hist_r[i], hist_g[i] / lambda);
    }
    curve.points.emplace_back(std::clamp(precision, 0.0, 1.0), std::clamp(recall, 0.0, 1.0));
  }
  return curve;
}

double f_score(const PrdCurve& curve, double beta) {
  if (curve.points.empty()) throw input_error("f_score: empty curve");
  double b2 = beta * beta;
  double best = 0.0;
  for (auto [p, r] : curve.points) {
    double denom = b2 * p + r;
    double f = denom > 0.0 ? (1.0 + b2) * p * r / denom : 0.0;
    best = std::max(best, f);
  }
  return best;
}

// ---- k-means clustering ----

namespace {

std::size_t nearest_center(const Matrix& centers, std::span<const double> x) {
  std::size_t best = 0;
  double best_d = squared_distance(x, centers.row(0));
  for (std::size_t c = 1; c < centers.rows; ++c) {
    double d = squared_distance(x, centers.row(c));
    if (d < best_d) {  // strict: ties keep the lowest cluster index
      best_d = d;
      best = c;
    }
  }
  return best;
}

}  // namespace

KmeansClustering kmeans_cluster(const Matrix& points, std::size_t k, uint64_t seed) {
  const std::size_t n = points.rows;
  if (k < 1) throw input_error("kmeans: k must be >= 1");
  if (n < k) throw input_error("kmeans: fewer points than clusters");

  // Canonical order: clustering cannot depend on input row order.
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    auto ra = points.row(a), rb = points.row(b);
    if (auto c = std::lexicographical_compare_three_way(ra.begin(), ra.end(), rb.begin(), rb.end());
        c != 0)
      return c < 0;
    return a < b;
  });
  std::size_t distinct = 1;
  for (std::size_t i = 1; i < n; ++i) {
    auto a = points.row(order[i]), b = points.row(order[i - 1]);
    if (!std::equal(a.begin(), a.end(), b.begin())) ++distinct;
  }
  if (distinct < k) throw input_error("kmeans: fewer distinct points than clusters");

  auto sorted_row = [&](std::size_t i) { return points.row(order[i]); };

  // k-means++ seeding
  Rng rng = Rng::substream(seed, "kmeans");
  Matrix centers(k, points.cols);
  std::vector<double> d2(n);
  std::size_t first = rng.index(n);
  std::copy(sorted_row(first).begin(), sorted_row(first).end(), centers.row(0).begin());
  for (std::size_t i = 0; i < n; ++i) d2[i] = squared_distance(sorted_row(i), centers.row(0));
  for (std::size_t c = 1; c < k; ++c) {
    double total = std::accumulate(d2.begin(), d2.end(), 0.0);
    std::size_t pick;
    if (total <= 0.0) {
      pick = rng.index(n);
    } else {
      double u = rng.uniform() * total;
      double acc = 0.0;
      pick = n - 1;
      for (std::size_t i = 0; i < n; ++i) {
        acc += d2[i];
        if (u < acc) {
          pick = i;
          break;
        }
      }
    }
    std::copy(sorted_row(pick).begin(), sorted_row(pick).end(), centers.row(c).begin());
    for (std::size_t i = 0; i < n; ++i)
      d2[i] = std::min(d2[i], squared_distance(sorted_row(i), centers.row(c)));
  }

  // Lloyd iterations, capped; empty clusters keep their previous centroid.
  std::vector<std::size_t> assign(n, k);  // k = unassigned sentinel
  for (int iter = 0; iter < 100; ++iter) {
    bool changed = false;
    for (std::size_t i = 0; i < n; ++i) {
      std::size_t a = nearest_center(centers, sorted_row(i));
      if (a != assign[i]) {
        assign[i] = a;
        changed = true;
      }
    }
    if (!changed) break;
    Matrix sums(k, points.cols);
    std::vector<std::size_t> counts(k, 0);
    for (std::size_t i = 0; i < n; ++i) {
      auto srow = sums.row(assign[i]);
      auto prow = sorted_row(i);
      for (std::size_t c = 0; c < points.cols; ++c) srow[c] += prow[c];
      ++counts[assign[i]];
    }
    for (std::size_t c = 0; c < k; ++c) {
      if (counts[c] == 0) continue;
      auto srow = sums.row(c);
      auto crow = centers.row(c);
      for (std::size_t j = 0; j < points.cols; ++j)
        crow[j] = srow[j] / static_cast<double>(counts[c]);
    }
  }

  KmeansClustering res;
  res.centers = std::move(centers);
  res.assignment.resize(n);
  for (std::size_t i = 0; i < n; ++i) res.assignment[order[i]] = assign[i];
  return res;
}

// ---- k-means PR ----

KmeansPrResult kmeans_pr(const Dataset& dr, const Dataset& dg, std::size_t k, double beta,
                         uint64_t seed) {
  if (dr.dim != dg.dim) throw input_error("kmeans_pr: dimension mismatch");
  if (dr.size() == 0 || dg.size() == 0) throw input_error("kmeans_pr: empty dataset");
  const std::size_t n = dr.size() + dg.size();
  Matrix stacked(n, dr.dim);
  std::copy(dr.data.begin(), dr.data.end(), stacked.data.begin());
  std::copy(dg.data.begin(), dg.data.end(),
            stacked.data.begin() + static_cast<std::ptrdiff_t>(dr.data.size()));

  KmeansClustering clusters = kmeans_cluster(stacked, k, seed);

  std::vector<double> hist_r(k, 0.0), hist_g(k, 0.0);
  for (std::size_t i = 0; i < dr.size(); ++i) hist_r[clusters.assignment[i]] += 1.0;
  for (std::size_t i = 0; i < dg.size(); ++i)
    hist_g[clusters.assignment[dr.size() + i]] += 1.0;
  for (double& v : hist_r) v /= static_cast<double>(dr.size());
  for (double& v : hist_g) v /= static_cast<double>(dg.size());

  KmeansPrResult res;
  res.curve = prd_curve(hist_r, hist_g);
  res.f_beta = f_score(res.curve, beta);
  res.f_inv_beta = f_score(res.curve, 1.0 / beta);
  return res;
}

// ---- k-nn PR ----

KnnManifold build_knn_manifold(const Dataset& d, std::size_t k) {
  const std::size_t n = d.size();
  if (n <= k) throw input_error("knn manifold: k must be smaller than the dataset");
  if (k < 1) throw input_error("knn manifold: k must be >= 1");
  KnnManifold m;
  m.centers = d.to_matrix();
  m.radii.resize(n);
  std::vector<std::pair<double, std::size_t>> dists;
  dists.reserve(n - 1);
  for (std::size_t i = 0; i < n; ++i) {
    dists.clear();
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      dists.emplace_back(squared_distance(d.row(i), d.row(j)), j);
    }
    // ties in the k-th neighbor break by index order
    std::nth_element(dists.begin(), dists.begin() + static_cast<std::ptrdiff_t>(k - 1),
                     dists.end());
    m.radii[i] = std::sqrt(dists[k - 1].first);
  }
  return m;
}

bool manifold_contains(const KnnManifold& m, std::span<const double> x) {
  for (std::size_t i = 0; i < m.centers.rows; ++i) {
    double d2 = squared_distance(x, m.centers.row(i));
    if (d2 <= m.radii[i] * m.radii[i]) return true;
  }
  return false;
}

PrResult knn_pr(const Dataset& dr, const Dataset& dg, std::size_t k) {
  if (dr.dim != dg.dim) throw input_error("knn_pr: dimension mismatch");
  if (dr.size() <= k || dg.size() <= k)
    throw input_error("knn_pr: k must be smaller than both datasets");
  KnnManifold real = build_knn_manifold(dr, k);
  KnnManifold fake = build_knn_manifold(dg, k);
  std::size_t in_real = 0, in_fake = 0;
  for (std::size_t i = 0; i < dg.size(); ++i)
    if (manifold_contains(real, dg.row(i))) ++in_real;
  for (std::size_t i = 0; i < dr.size(); ++i)
    if (manifold_contains(fake, dr.row(i))) ++in_fake;
  PrResult res;
  res.precision = static_cast<double>(in_real) / static_cast<double>(dg.size());
  res.recall = static_cast<double>(in_fake) / static_cast<double>(dr.size());
  return res;
}

}  // namespace genmeter
