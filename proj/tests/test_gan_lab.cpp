#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>

#include "genmeter/gan_lab.hpp"
#include "genmeter/mdl_metric.hpp"
#include "genmeter/samplers.hpp"
#include "test_util.hpp"

using namespace genmeter;
using namespace genmeter::testutil;

namespace {

GanConfig smoke_cfg(GanVariant v, uint64_t seed) {
  GanConfig cfg = desk_gan_config(v, seed);
  cfg.epochs = 12;
  cfg.gen_hidden = {32, 32};
  cfg.disc_hidden = {32, 32};
  cfg.batch_size = 64;
  return cfg;
}

MlpNetwork linear_gen_net(std::size_t dim) {
  MlpNetwork net;
  net.layer_widths = {dim, dim};
  net.weights.push_back(Matrix::identity(dim));
  net.biases.push_back(std::vector<double>(dim, 0.0));
  net.activations.push_back({Activation::identity, 0.0});
  return net;
}

}  // namespace

TEST_CASE("const_speed_loss: affine generator has zero loss and zero gradients") {
  MlpNetwork gen = linear_gen_net(2);
  gen.weights[0].at(0, 1) = 0.5;
  gen.biases[0][0] = -0.25;
  Rng rng(1);
  Matrix za = random_batch(3, 2, rng), zb = random_batch(3, 2, rng);
  ConstSpeedResult res = const_speed_loss(gen, za, zb, 16);
  CHECK(res.value < 1e-20);
  for (const auto& w : res.gen_grads.weights)
    for (double v : w.data) CHECK(std::abs(v) < 1e-10);
  for (const auto& b : res.gen_grads.biases)
    for (double v : b) CHECK(std::abs(v) < 1e-10);
}

TEST_CASE("const_speed_loss: gradients match finite differences on a curved generator") {
  Rng init(7);
  MlpNetwork gen = make_mlp({1, 8, 2}, {Activation::tanh, 0.0}, {Activation::identity, 0.0}, init);
  // widen the weights so paths genuinely curve
  for (auto& w : gen.weights) scale_inplace(w, 3.0);
  Rng rng(8);
  Matrix za = random_batch(2, 1, rng), zb = random_batch(2, 1, rng);
  ConstSpeedResult res = const_speed_loss(gen, za, zb, 8);
  CHECK(res.value > 0.0);
  Gradients fd = fd_param_gradients(gen, [&](const MlpNetwork& n) {
    return const_speed_loss(n, za, zb, 8).value;
  });
  CHECK(max_rel_error(res.gen_grads, fd, 1e-5) < 1e-3);
}

TEST_CASE("const_speed_loss: invariant to swapping the pair endpoints") {
  Rng init(9);
  MlpNetwork gen = make_mlp({2, 10, 2}, {Activation::tanh, 0.0}, {Activation::identity, 0.0},
                            init);
  Rng rng(10);
  Matrix za = random_batch(4, 2, rng), zb = random_batch(4, 2, rng);
  double fwd = const_speed_loss(gen, za, zb, 12).value;
  double rev = const_speed_loss(gen, zb, za, 12).value;
  CHECK(fwd == doctest::Approx(rev).epsilon(1e-12));
}

TEST_CASE("gan config invariants") {
  GanConfig cfg = desk_gan_config(GanVariant::wgan_1gp, 1);
  cfg.const_weight = 5.0;  // not the const variant
  CHECK_THROWS_AS(cfg.validate(), config_error);
  GanConfig cc = desk_gan_config(GanVariant::wgan_1gp_const, 1);
  CHECK(cc.const_weight > 0.0);
  cc.const_weight = 0.0;
  CHECK_THROWS_AS(cc.validate(), config_error);
  CHECK(parse_gan_variant("wgan0gp") == GanVariant::wgan_0gp);
  CHECK_THROWS_AS(parse_gan_variant("wgan9gp"), config_error);
}

TEST_CASE("all five variants run a short smoke training without diverging") {
  SyntheticSampler moons = SyntheticSampler::two_moons(0.05);
  Dataset train = moons.sample(512, uint64_t{5}, false);
  std::vector<GanVariant> variants = {GanVariant::gan_0gp, GanVariant::gan_r1,
                                      GanVariant::wgan_1gp, GanVariant::wgan_0gp,
                                      GanVariant::wgan_1gp_const};
  std::vector<GanRun> runs(variants.size());
  std::vector<std::function<void()>> jobs;
  for (std::size_t i = 0; i < variants.size(); ++i)
    jobs.push_back([&, i] { runs[i] = train_gan(smoke_cfg(variants[i], 33), train); });
  run_parallel(std::move(jobs), 2);
  for (std::size_t i = 0; i < variants.size(); ++i) {
    const GanRun& run = runs[i];
    CHECK(run.log.size() == 12);
    for (const auto& e : run.log) {
      CHECK(std::isfinite(e.gen_loss));
      CHECK(std::isfinite(e.disc_loss));
    }
    // epochs contiguous from 0
    for (std::size_t e = 0; e < run.log.size(); ++e)
      CHECK(run.log[e].epoch == static_cast<long>(e));
    CHECK(all_finite(run.generator.weights[0]));
  }
  // the const variant actually reports a regularizer value
  CHECK(runs[4].log.back().reg_value > 0.0);
  CHECK(runs[2].log.back().reg_value == 0.0);
}

TEST_CASE("training is deterministic given the seed") {
  SyntheticSampler moons = SyntheticSampler::two_moons(0.05);
  Dataset train = moons.sample(256, uint64_t{6}, false);
  GanConfig cfg = smoke_cfg(GanVariant::wgan_0gp, 44);
  cfg.epochs = 4;
  GanRun a = train_gan(cfg, train);
  GanRun b = train_gan(cfg, train);
  for (std::size_t l = 0; l < a.generator.num_layers(); ++l)
    CHECK(a.generator.weights[l].data == b.generator.weights[l].data);
  for (std::size_t e = 0; e < a.log.size(); ++e) {
    CHECK(a.log[e].gen_loss == b.log[e].gen_loss);
    CHECK(a.log[e].disc_loss == b.log[e].disc_loss);
  }
}

TEST_CASE("training writes checkpoints that load back as generators") {
  SyntheticSampler moons = SyntheticSampler::two_moons(0.05);
  Dataset train = moons.sample(256, uint64_t{7}, false);
  GanConfig cfg = smoke_cfg(GanVariant::wgan_1gp, 55);
  cfg.epochs = 6;
  cfg.checkpoint_every = 3;
  std::string dir = "/tmp/genmeter_gan_ckpt";
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  GanRun run = train_gan(cfg, train, dir);
  int with_ckpt = 0;
  for (const auto& e : run.log)
    if (!e.checkpoint.empty()) {
      ++with_ckpt;
      MlpNetwork net = load_network(e.checkpoint);
      CHECK(net.input_width() == cfg.latent.dim);
      CHECK(net.output_width() == 2);
    }
  CHECK(with_ckpt == 3);  // epochs 0, 3, and the final epoch 5
  std::filesystem::remove_all(dir);
}

TEST_CASE("evaluate_checkpoint: memorizer shows the memorization signature") {
  SyntheticSampler moons = SyntheticSampler::two_moons(0.05);
  auto [train, test] = split_disjoint(moons, 800, 300, 66);
  NoisyMemorizer memorizer(train, 0.0);

  EvalSuiteConfig suite;
  suite.nnd = NndConfig{};
  suite.nnd.critic_hidden = {32, 32};
  suite.nnd.iterations = 400;
  suite.nnd.eval_window = 50;
  suite.nnd.batch_size = 64;
  suite.nnd_fixed_m = 256;
  // keep the sample well below |D| so resampling collisions stay rare and
  // the fake spheres keep their inter-atom radii
  suite.sample_n = 256;
  suite.comp_pairs = 256;
  suite.comp_T = 64;
  suite.seed = 5;
  MetricReport mem_report = evaluate_checkpoint(memorizer, train, test, suite);

  // near-perfect k-nn scores despite having no generalization at all
  CHECK(mem_report.find("knn_precision")->value > 0.9);
  CHECK(mem_report.find("knn_recall")->value > 0.9);

  // a smooth linear baseline covering the data box has far lower complexity
  Matrix a(2, 2);
  a.at(0, 0) = 1.5;
  a.at(1, 1) = 1.0;
  LinearGenerator smooth(a, {0.0, 0.0});
  CompEstimate smooth_comp = comp(smooth, 256, 64, 5);
  CHECK(mem_report.find("comp")->value > 3.0 * smooth_comp.value);

  // f_gen = alpha * (train-side divergence) + comp by construction, and the
  // memorizer drives the divergence term toward zero
  CHECK(mem_report.find("f_gen")->value ==
        doctest::Approx(suite.alpha * mem_report.find("nnd_fixed_train")->value +
                        mem_report.find("comp")->value));
  CHECK(std::abs(mem_report.find("nnd_fixed_train")->value) < 0.1);

  // determinism of the whole report
  MetricReport again = evaluate_checkpoint(memorizer, train, test, suite);
  REQUIRE(again.entries.size() == mem_report.entries.size());
  for (std::size_t i = 0; i < again.entries.size(); ++i)
    CHECK(again.entries[i].value == mem_report.entries[i].value);
}

TEST_CASE("evaluate_checkpoint: constant generator collapses pairwise length") {
  SyntheticSampler moons = SyntheticSampler::two_moons(0.05);
  auto [train, test] = split_disjoint(moons, 300, 300, 77);
  ConstantGenerator collapse({0.0, 0.0}, LatentSpec{2, LatentSpec::Prior::uniform});
  EvalSuiteConfig suite;
  suite.nnd.critic_hidden = {32, 32};
  suite.nnd.iterations = 600;
  suite.nnd.eval_window = 100;
  suite.nnd.batch_size = 64;
  suite.nnd_fixed_m = 300;
  suite.sample_n = 300;
  suite.comp_pairs = 128;
  suite.comp_T = 32;
  suite.seed = 6;
  MetricReport report = evaluate_checkpoint(collapse, train, test, suite);
  CHECK(report.find("pairwise_path_length")->value == 0.0);
  CHECK(report.find("comp")->value == 0.0);
  CHECK(report.find("nnd_fixed")->value > 0.2);  // mode collapse is visible
}

TEST_CASE("non-saturating variants survive a full desk-config run"
          * doctest::timeout(900)) {
  // the wgan variants get their full desk-scale runs in the acceptance
  // suite; this covers the remaining two at the same configuration
  SyntheticSampler moons = SyntheticSampler::two_moons(0.05);
  Dataset train = moons.sample(1024, uint64_t{15}, false);
  std::vector<GanRun> runs(2);
  std::vector<std::function<void()>> jobs;
  jobs.push_back([&] { runs[0] = train_gan(desk_gan_config(GanVariant::gan_0gp, 15), train); });
  jobs.push_back([&] { runs[1] = train_gan(desk_gan_config(GanVariant::gan_r1, 15), train); });
  run_parallel(std::move(jobs), 2);
  for (const GanRun& run : runs) {
    CHECK(run.log.size() == 150);
    for (const auto& e : run.log) {
      CHECK(std::isfinite(e.gen_loss));
      CHECK(std::isfinite(e.disc_loss));
    }
  }
}
