#pragma once

#include "genmeter/dataset.hpp"

namespace genmeter {

// Seeded synthetic data families standing in for p_data. Labels are the
// ground-truth component/class indices where the family has any.
struct SyntheticSampler {
  enum class Family { gaussian_mixture, two_moons, ring, uniform_box };

  Family family = Family::uniform_box;
  std::size_t dim = 2;

  // gaussian_mixture parameters (also used by ring after construction)
  Matrix means;                 // components x dim
  std::vector<double> sigmas;   // per-component isotropic sigma
  std::vector<double> weights;  // sums to 1

  double moon_noise = 0.05;
  double box_halfwidth = 1.0;

  static SyntheticSampler gaussian_mixture(Matrix means, std::vector<double> sigmas,
                                           std::vector<double> weights);
  static SyntheticSampler two_moons(double noise);
  static SyntheticSampler ring(std::size_t k, double radius, double sigma);
  static SyntheticSampler uniform_box(std::size_t dim, double halfwidth = 1.0);
  // k tight equal-weight clusters at seeded uniform positions in a box; a
  // clustered stand-in for data whose support leaves most of the space empty.
  static SyntheticSampler random_blobs(std::size_t k, std::size_t dim, double halfwidth,
                                       double sigma, uint64_t seed);

  std::size_t num_classes() const;
  void sample_row(Rng& rng, std::span<double> out, int* label) const;
  Dataset sample(std::size_t n, Rng& rng, bool with_labels = true) const;
  Dataset sample(std::size_t n, uint64_t seed, bool with_labels = true) const;
};

// Two independently seeded sets with verified empty bitwise intersection.
// Collisions are resampled; a sampler that cannot produce disjoint sets
// (tiny discrete support) raises input_error.
std::pair<Dataset, Dataset> split_disjoint(const SyntheticSampler& sampler, std::size_t n_train,
                                           std::size_t n_test, uint64_t seed);

}  // namespace genmeter
