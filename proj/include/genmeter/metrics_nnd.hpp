#pragma once

#include "genmeter/generators.hpp"
#include "genmeter/gradient_penalty.hpp"

namespace genmeter {

struct NndConfig {
  std::vector<std::size_t> critic_hidden = {64, 64, 64};
  long iterations = 2000;
  double lr = 1e-3;
  std::size_t batch_size = 128;
  GpMode gp_mode = GpMode::one_centered_gp;
  double gp_weight = 10.0;
  std::size_t eval_batches = 4;
  long eval_window = 200;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  // Optional fraction of fixed-dataset rows held out for the read-out.
  // Zero evaluates on the trained rows themselves: the fixed protocol's
  // entire point is that a materialized fake set can be fitted, and the
  // estimate must see that.
  double eval_holdout = 0.0;
  uint64_t seed = 1;

  void validate() const;
};

NndConfig desk_nnd_config();
// The reference recipe: 3x512 critic, 20000 iterations, lr 1e-4.
NndConfig paper_nnd_config();

class SampleSource {
 public:
  virtual ~SampleSource() = default;
  virtual std::size_t dim() const = 0;
  virtual Matrix next_batch(std::size_t n, Rng& rng) = 0;
};

// Cycles a finite dataset, reshuffling at every epoch boundary; each row is
// visited exactly once per epoch.
class FixedDatasetSource final : public SampleSource {
 public:
  explicit FixedDatasetSource(Matrix rows);
  std::size_t dim() const override { return rows_.cols; }
  std::size_t size() const { return rows_.rows; }
  Matrix next_batch(std::size_t n, Rng& rng) override;

 private:
  Matrix rows_;
  std::vector<std::size_t> order_;
  std::size_t cursor_;
};

// Fresh generator samples on every call.
class GeneratorSource final : public SampleSource {
 public:
  explicit GeneratorSource(const GeneratorModel& gen) : gen_(gen) {}
  std::size_t dim() const override { return gen_.data_dim(); }
  Matrix next_batch(std::size_t n, Rng& rng) override { return gen_.sample(n, rng); }

 private:
  const GeneratorModel& gen_;
};

// 90/10 train/eval row split used to keep the critic's read-out off the exact
// rows it trained on.
std::pair<Matrix, Matrix> holdout_split(const Matrix& rows, Rng& rng, double eval_fraction = 0.1);

struct CriticRun {
  MlpNetwork critic;
  double nnd_estimate = 0.0;
  std::vector<double> trace;  // per-iteration training objective
};

// Trains the critic to maximize E_real[f] - E_fake[f] - gp_weight * penalty.
// The estimate is the mean objective over the final eval_window iterations,
// each evaluated on eval_batches batches from the eval sources.
CriticRun train_critic(const NndConfig& cfg, SampleSource& real, SampleSource& fake,
                       SampleSource& real_eval, SampleSource& fake_eval);

// Streaming protocol: fake samples drawn fresh throughout training.
double nnd_streaming(const NndConfig& cfg, const Dataset& test, const GeneratorModel& gen);

// Fixed-size protocol: materialize exactly m generator samples once, then
// train against them as a finite dataset.
double nnd_fixed(const NndConfig& cfg, const Dataset& test, const GeneratorModel& gen,
                 std::size_t m, uint64_t seed);

struct NndGridPoint {
  double epsilon = 0.0;
  std::size_t subset_size = 0;
  bool fixed_protocol = false;
  uint64_t seed = 0;
  double estimate = 0.0;
};

// The noisy-memorizer grid behind the protocol-reversal experiment.
// Jobs run in parallel and merge deterministically by grid position.
std::vector<NndGridPoint> nnd_noise_grid(const NndConfig& base, const Dataset& train,
                                         const Dataset& test, const std::vector<double>& epsilons,
                                         const std::vector<std::size_t>& subset_sizes,
                                         const std::vector<uint64_t>& seeds, std::size_t fixed_m,
                                         NoiseKind noise, NoiseBound bound = NoiseBound::none,
                                         unsigned threads = 0);

}  // namespace genmeter
