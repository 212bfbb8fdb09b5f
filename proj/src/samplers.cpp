#include "genmeter/samplers.hpp"

#include <cmath>
#include <cstring>
#include <unordered_set>

namespace genmeter {

SyntheticSampler SyntheticSampler::gaussian_mixture(Matrix means, std::vector<double> sigmas,
                                                    std::vector<double> weights) {
  if (means.rows == 0 || means.rows != sigmas.size() || means.rows != weights.size())
    throw config_error("gaussian_mixture: means/sigmas/weights must agree");
  double wsum = 0.0;
  for (double w : weights) wsum += w;
  if (std::abs(wsum - 1.0) > 1e-9) throw config_error("gaussian_mixture: weights must sum to 1");
  SyntheticSampler s;
  s.family = Family::gaussian_mixture;
  s.dim = means.cols;
  s.means = std::move(means);
  s.sigmas = std::move(sigmas);
  s.weights = std::move(weights);
  return s;
}

SyntheticSampler SyntheticSampler::two_moons(double noise) {
  SyntheticSampler s;
  s.family = Family::two_moons;
  s.dim = 2;
  s.moon_noise = noise;
  return s;
}

SyntheticSampler SyntheticSampler::ring(std::size_t k, double radius, double sigma) {
  if (k == 0) throw config_error("ring: k must be >= 1");
  Matrix means(k, 2);
  for (std::size_t i = 0; i < k; ++i) {
    double a = 2.0 * M_PI * static_cast<double>(i) / static_cast<double>(k);
    means.at(i, 0) = radius * std::cos(a);
    means.at(i, 1) = radius * std::sin(a);
  }
  SyntheticSampler s;
  s.family = Family::ring;
  s.dim = 2;
  s.means = std::move(means);
  s.sigmas.assign(k, sigma);
  s.weights.assign(k, 1.0 / static_cast<double>(k));
  return s;
}

SyntheticSampler SyntheticSampler::uniform_box(std::size_t dim, double halfwidth) {
  if (dim == 0) throw config_error("uniform_box: dim must be >= 1");
  if (halfwidth <= 0.0) throw config_error("uniform_box: halfwidth must be positive");
  SyntheticSampler s;
  s.family = Family::uniform_box;
  s.dim = dim;
  s.box_halfwidth = halfwidth;
  return s;
}

SyntheticSampler SyntheticSampler::random_blobs(std::size_t k, std::size_t dim, double halfwidth,
                                                double sigma, uint64_t seed) {
  if (k == 0 || dim == 0) throw config_error("random_blobs: k and dim must be >= 1");
  Rng rng = Rng::substream(seed, "blob-centers");
  Matrix means(k, dim);
  for (double& x : means.data) x = rng.uniform(-halfwidth, halfwidth);
  std::vector<double> sigmas(k, sigma);
  std::vector<double> weights(k, 1.0 / static_cast<double>(k));
  return gaussian_mixture(std::move(means), std::move(sigmas), std::move(weights));
}

std::size_t SyntheticSampler::num_classes() const {
  switch (family) {
    case Family::gaussian_mixture:
    case Family::ring:
      return means.rows;
    case Family::two_moons:
      return 2;
    case Family::uniform_box:
      return 1;
  }
  return 1;
}

void SyntheticSampler::sample_row(Rng& rng, std::span<double> out, int* label) const {
  switch (family) {
    case Family::gaussian_mixture:
    case Family::ring: {
      double u = rng.uniform();
      std::size_t comp = 0;
      double acc = 0.0;
      for (std::size_t i = 0; i < weights.size(); ++i) {
        acc += weights[i];
        if (u < acc || i + 1 == weights.size()) {
          comp = i;
          break;
        }
      }
      auto mean = means.row(comp);
      for (std::size_t c = 0; c < dim; ++c) out[c] = mean[c] + sigmas[comp] * rng.gaussian();
      if (label) *label = static_cast<int>(comp);
      break;
    }
    case Family::two_moons: {
      int cls = rng.uniform() < 0.5 ? 0 : 1;
      double theta = rng.uniform(0.0, M_PI);
      double x, y;
      if (cls == 0) {
        x = std::cos(theta);
        y = std::sin(theta);
      } else {
        x = 1.0 - std::cos(theta);
        y = 0.5 - std::sin(theta);
      }
      // center the pair of arcs on the origin
      out[0] = x - 0.5 + moon_noise * rng.gaussian();
      out[1] = y - 0.25 + moon_noise * rng.gaussian();
      if (label) *label = cls;
      break;
    }
    case Family::uniform_box: {
      for (std::size_t c = 0; c < dim; ++c) out[c] = rng.uniform(-box_halfwidth, box_halfwidth);
      if (label) *label = 0;
      break;
    }
  }
}

Dataset SyntheticSampler::sample(std::size_t n, Rng& rng, bool with_labels) const {
  Dataset ds(dim);
  ds.data.resize(n * dim);
  if (with_labels) ds.labels.resize(n);
  std::vector<double> row(dim);
  for (std::size_t r = 0; r < n; ++r) {
    int label = 0;
    sample_row(rng, row, &label);
    std::copy(row.begin(), row.end(), ds.data.begin() + static_cast<std::ptrdiff_t>(r * dim));
    if (with_labels) ds.labels[r] = label;
  }
  return ds;
}

Dataset SyntheticSampler::sample(std::size_t n, uint64_t seed, bool with_labels) const {
  Rng rng = Rng::substream(seed, "sampler");
  return sample(n, rng, with_labels);
}

static std::string row_key(std::span<const double> row) {
  std::string key(row.size() * sizeof(double), '\0');
  std::memcpy(key.data(), row.data(), key.size());
  return key;
}

std::pair<Dataset, Dataset> split_disjoint(const SyntheticSampler& sampler, std::size_t n_train,
                                           std::size_t n_test, uint64_t seed) {
  Rng rng = Rng::substream(seed, "split-disjoint");
  std::unordered_set<std::string> seen;
  Dataset train(sampler.dim), test(sampler.dim);
  std::vector<double> row(sampler.dim);
  auto draw_into = [&](Dataset& ds) {
    const std::size_t max_attempts = 1000;
    for (std::size_t attempt = 0; attempt < max_attempts; ++attempt) {
      int label = 0;
      sampler.sample_row(rng, row, &label);
      auto key = row_key(row);
      if (seen.insert(std::move(key)).second) {
        ds.append_row(row, label);
        return;
      }
    }
    throw input_error("split_disjoint: sampler cannot produce disjoint sets");
  };
  for (std::size_t i = 0; i < n_train; ++i) draw_into(train);
  for (std::size_t i = 0; i < n_test; ++i) draw_into(test);
  return {std::move(train), std::move(test)};
}

}  // namespace genmeter
