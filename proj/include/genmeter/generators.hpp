#pragma once

#include <memory>

#include "genmeter/dataset.hpp"
#include "genmeter/mlp.hpp"

namespace genmeter {

struct LatentSpec {
  enum class Prior { uniform, gaussian };  // uniform(-1,1)^d or N(0, I)
  std::size_t dim = 1;
  Prior prior = Prior::uniform;
};

// Deterministic map from latent space to data space plus a seedable prior.
// All stochasticity lives in the prior; NoisyMemorizer folds its noise into
// explicit latent coordinates so map stays a pure function.
class GeneratorModel {
 public:
  virtual ~GeneratorModel() = default;

  virtual const LatentSpec& latent() const = 0;
  virtual std::size_t data_dim() const = 0;
  virtual void map(std::span<const double> z, std::span<double> out) const = 0;

  std::vector<double> map_vec(std::span<const double> z) const;
  virtual Matrix map_batch(const Matrix& zs) const;

  std::vector<double> sample_latent(Rng& rng) const;
  Matrix sample(std::size_t n, Rng& rng) const;
  Dataset sample_dataset(std::size_t n, uint64_t seed) const;
};

enum class NoiseKind { uniform, gaussian };

// What happens to noisy coordinates that leave the memorized data's range:
// nothing (the default), clamping, or reflection back into the range.
// Reflection keeps the samples in-range without piling mass onto the range
// faces the way clamping does.
enum class NoiseBound { none, clip, reflect };

// The memorizing generator: pick a stored point at random, add eps-scaled
// noise. Outputs keep their raw values unless a NoiseBound is set.
class NoisyMemorizer final : public GeneratorModel {
 public:
  NoisyMemorizer(Dataset memorized, double epsilon, NoiseKind kind = NoiseKind::uniform,
                 NoiseBound bound = NoiseBound::none);

  const LatentSpec& latent() const override { return latent_; }
  std::size_t data_dim() const override { return memorized_.dim; }
  void map(std::span<const double> z, std::span<double> out) const override;

  const Dataset& memorized() const { return memorized_; }
  double epsilon() const { return epsilon_; }
  NoiseKind noise_kind() const { return kind_; }

 private:
  Dataset memorized_;
  double epsilon_;
  NoiseKind kind_;
  NoiseBound bound_;
  LatentSpec latent_;
  std::vector<double> lo_, hi_;  // per-coordinate data range, for clipping
};

// x = A z + b. Constant-speed paths under linear latent interpolation.
class LinearGenerator final : public GeneratorModel {
 public:
  LinearGenerator(Matrix a, std::vector<double> b,
                  LatentSpec::Prior prior = LatentSpec::Prior::uniform);

  const LatentSpec& latent() const override { return latent_; }
  std::size_t data_dim() const override { return a_.rows; }
  void map(std::span<const double> z, std::span<double> out) const override;

  const Matrix& a() const { return a_; }

 private:
  Matrix a_;
  std::vector<double> b_;
  LatentSpec latent_;
};

// Analytic stand-in for a memorizing generator: interpolates between two
// anchor points through a steep sigmoid in a 1-D latent, so the path speed
// blows up mid-path while the path length stays that of the straight segment.
class SigmoidStepGenerator final : public GeneratorModel {
 public:
  SigmoidStepGenerator(std::vector<double> x0, std::vector<double> x1, double sharpness);

  const LatentSpec& latent() const override { return latent_; }
  std::size_t data_dim() const override { return x0_.size(); }
  void map(std::span<const double> z, std::span<double> out) const override;

  double sharpness() const { return sharpness_; }

 private:
  std::vector<double> x0_, x1_;
  double sharpness_;
  LatentSpec latent_;
};

// Wraps a trained MLP generator (gan_lab checkpoints).
class MlpGenerator final : public GeneratorModel {
 public:
  MlpGenerator(MlpNetwork net, LatentSpec latent);

  const LatentSpec& latent() const override { return latent_; }
  std::size_t data_dim() const override { return net_.output_width(); }
  void map(std::span<const double> z, std::span<double> out) const override;
  Matrix map_batch(const Matrix& zs) const override;

  const MlpNetwork& net() const { return net_; }
  MlpNetwork& net() { return net_; }

 private:
  MlpNetwork net_;
  LatentSpec latent_;
};

// Maps a generator's latent coordinates straight to data space.
class IdentityGenerator final : public GeneratorModel {
 public:
  explicit IdentityGenerator(LatentSpec latent) : latent_(latent) {}
  const LatentSpec& latent() const override { return latent_; }
  std::size_t data_dim() const override { return latent_.dim; }
  void map(std::span<const double> z, std::span<double> out) const override {
    for (std::size_t i = 0; i < z.size(); ++i) out[i] = z[i];
  }

 private:
  LatentSpec latent_;
};

// Collapses everything to a single point.
class ConstantGenerator final : public GeneratorModel {
 public:
  ConstantGenerator(std::vector<double> point, LatentSpec latent)
      : point_(std::move(point)), latent_(latent) {}
  const LatentSpec& latent() const override { return latent_; }
  std::size_t data_dim() const override { return point_.size(); }
  void map(std::span<const double>, std::span<double> out) const override {
    for (std::size_t i = 0; i < point_.size(); ++i) out[i] = point_[i];
  }

 private:
  std::vector<double> point_;
  LatentSpec latent_;
};

// n noisy-memorizer samples; deterministic given seed.
Dataset memorizer_sample(const NoisyMemorizer& gen, std::size_t n, uint64_t seed);

// Memorizer serialization: a small spec file holding (dataset reference,
// epsilon, noise kind, boundary mode); the memorized rows live in a regular
// dataset file next to it.
void save_memorizer(const NoisyMemorizer& gen, const std::string& spec_path,
                    const std::string& dataset_path);
NoisyMemorizer load_memorizer(const std::string& spec_path);

// (1-t) z0 + t z1 with t in [0,1].
std::vector<double> interpolate_latent(std::span<const double> z0, std::span<const double> z1,
                                       double t);

}  // namespace genmeter
