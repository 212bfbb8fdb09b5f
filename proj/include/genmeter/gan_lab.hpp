#pragma once

#include "genmeter/metrics_nnd.hpp"
#include "genmeter/report.hpp"

namespace genmeter {

enum class GanVariant { gan_0gp, gan_r1, wgan_1gp, wgan_0gp, wgan_1gp_const };

const char* gan_variant_name(GanVariant v);
GanVariant parse_gan_variant(const std::string& name);

struct GanConfig {
  GanVariant variant = GanVariant::wgan_1gp;
  LatentSpec latent{2, LatentSpec::Prior::uniform};
  std::vector<std::size_t> gen_hidden = {64, 64, 64};
  std::vector<std::size_t> disc_hidden = {64, 64, 64};
  double lr = 2e-4;
  double gp_weight = 10.0;
  double const_weight = 0.0;   // > 0 only for wgan_1gp_const
  std::size_t const_T = 16;    // speed-grid resolution of the regularizer
  std::size_t const_pairs = 4; // latent pairs per generator step
  long epochs = 150;
  std::size_t batch_size = 64;
  // momentum-free first moment keeps the 1:1-step adversarial game stable
  double adam_beta1 = 0.0;
  double adam_beta2 = 0.999;
  long checkpoint_every = 10;
  uint64_t seed = 1;

  void validate() const;
};

// Desk presets for the five variants; lr_collapse reproduces the deliberately
// unstable run used to demonstrate saturated k-nn recall.
GanConfig desk_gan_config(GanVariant v, uint64_t seed, bool lr_collapse = false);

struct TrainingLogEntry {
  long epoch = 0;
  double gen_loss = 0.0;
  double disc_loss = 0.0;
  double reg_value = 0.0;
  std::string checkpoint;  // empty when none written this epoch
};

struct GanRun {
  MlpNetwork generator;
  LatentSpec latent;
  std::vector<TrainingLogEntry> log;
};

// Alternating Adam updates, one discriminator step per generator step.
// checkpoint_dir may be empty to skip checkpoint files.
GanRun train_gan(const GanConfig& cfg, const Dataset& train, const std::string& checkpoint_dir = "");

struct ConstSpeedResult {
  double value = 0.0;
  Gradients gen_grads;
};

// Variance of discretized path speeds through the current generator,
// averaged over latent pairs, differentiated w.r.t. generator parameters.
// z_a and z_b hold one latent pair per row.
ConstSpeedResult const_speed_loss(const MlpNetwork& gen, const Matrix& z_a, const Matrix& z_b,
                                  std::size_t T);

struct EvalSuiteConfig {
  NndConfig nnd = desk_nnd_config();
  std::size_t nnd_fixed_m = 2000;
  std::size_t kmeans_k = 20;
  double beta = 8.0;
  std::size_t knn_k = 3;
  std::size_t sample_n = 1000;  // generated points per dataset-based metric
  std::size_t comp_pairs = 1024;
  std::size_t comp_T = 128;
  double alpha = 1.0;
  uint64_t seed = 1;
};

// Runs the full metric suite against one generator checkpoint.
MetricReport evaluate_checkpoint(const GeneratorModel& gen, const Dataset& train,
                                 const Dataset& test, const EvalSuiteConfig& cfg);

}  // namespace genmeter
