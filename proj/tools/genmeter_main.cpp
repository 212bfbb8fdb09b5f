#include <cstdio>
#include <exception>
#include <string>

#include <CLI11.hpp>

#include "genmeter/experiment.hpp"

using namespace genmeter;

namespace {

struct GlobalOpts {
  std::string config;
  std::string out;
  std::string preset = "desk";
  uint64_t seed = 0;
  bool seed_set = false;
};

ExperimentConfig base_config(const GlobalOpts& g, const std::string& kind) {
  ExperimentConfig cfg;
  if (!g.config.empty()) cfg = load_experiment_config(g.config);
  if (cfg.kind.empty()) cfg.kind = kind;
  if (cfg.kind != kind)
    throw config_error("config file kind '" + cfg.kind + "' does not match subcommand '" + kind +
                       "'");
  if (!g.out.empty()) cfg.out_dir = g.out;
  if (g.seed_set) cfg.seeds = {g.seed};
  cfg.preset = g.preset;
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"genmeter: evaluation metrics for generative latent variable models"};
  app.require_subcommand(1);
  app.fallthrough();  // global flags may appear after the subcommand

  GlobalOpts g;
  app.add_option("--config", g.config, "experiment config file (key=value sections or JSON)");
  app.add_option("--out", g.out, "output directory");
  app.add_option("--preset", g.preset, "desk or paper preset")
      ->check(CLI::IsMember({"desk", "paper"}));
  auto* seed_opt = app.add_option("--seed", g.seed, "single seed override");

  // eval
  auto* eval = app.add_subcommand("eval", "run the metric suite on datasets or a checkpoint");
  std::string eval_test, eval_fake, eval_train, eval_checkpoint;
  eval->add_option("--test", eval_test, "test dataset path");
  eval->add_option("--fake", eval_fake, "generated dataset path");
  eval->add_option("--train", eval_train, "training dataset path");
  eval->add_option("--checkpoint", eval_checkpoint, "generator checkpoint path");

  // nnd-grid
  auto* grid = app.add_subcommand("nnd-grid", "noisy-memorizer grid, both NND protocols");
  std::string grid_eps, grid_sizes;
  long grid_ntrain = 0, grid_ntest = 0;
  grid->add_option("--epsilons", grid_eps, "comma list of noise levels");
  grid->add_option("--sizes", grid_sizes, "comma list of subset sizes ('full' allowed)");
  grid->add_option("--n-train", grid_ntrain, "training set size");
  grid->add_option("--n-test", grid_ntest, "test set size");
  std::string grid_seeds;
  grid->add_option("--seeds", grid_seeds, "comma list of seeds");

  // adversarial
  auto* adv = app.add_subcommand("adversarial", "build and score the minimal fooling datasets");

  // probe
  auto* probe = app.add_subcommand("probe", "monotonicity probe over generator support sizes");
  std::string probe_sizes;
  probe->add_option("--sizes", probe_sizes, "comma list of sizes");

  // train
  auto* train = app.add_subcommand("train", "train a GAN variant on synthetic data");
  std::string train_variant;
  long train_epochs = 0;
  train->add_option("--variant", train_variant,
                    "gan0gp | ganr1 | wgan1gp | wgan0gp | wgan1gp-const");
  train->add_option("--epochs", train_epochs, "training epochs");
  std::string train_seeds;
  train->add_option("--seeds", train_seeds, "comma list of seeds");

  // comp
  auto* comp_cmd = app.add_subcommand("comp", "complexity sweep over shipped generators");
  std::string comp_checkpoint;
  comp_cmd->add_option("--checkpoint", comp_checkpoint, "extra generator checkpoint to score");

  // dataset gen
  auto* dataset = app.add_subcommand("dataset", "dataset utilities");
  auto* dataset_gen = dataset->add_subcommand("gen", "sample a synthetic dataset to disk");
  std::string ds_family;
  long ds_n = 0;
  std::string ds_format;
  dataset_gen->add_option("--family", ds_family, "two_moons | ring | uniform_box | gaussian_mixture");
  dataset_gen->add_option("--n", ds_n, "number of points");
  dataset_gen->add_option("--format", ds_format, "csv or binary");

  CLI11_PARSE(app, argc, argv);
  g.seed_set = seed_opt->count() > 0;

  try {
    ExperimentConfig cfg;
    if (eval->parsed()) {
      cfg = base_config(g, "metrics");
      if (!eval_test.empty()) cfg.set("test", eval_test);
      if (!eval_fake.empty()) cfg.set("fake", eval_fake);
      if (!eval_train.empty()) cfg.set("train", eval_train);
      if (!eval_checkpoint.empty()) cfg.set("checkpoint", eval_checkpoint);
    } else if (grid->parsed()) {
      cfg = base_config(g, "nnd_noise_grid");
      if (!grid_eps.empty()) cfg.set("epsilons", grid_eps);
      if (!grid_sizes.empty()) cfg.set("sizes", grid_sizes);
      if (grid_ntrain > 0) cfg.set("n_train", std::to_string(grid_ntrain));
      if (grid_ntest > 0) cfg.set("n_test", std::to_string(grid_ntest));
      if (!grid_seeds.empty()) cfg.seeds = parse_seed_list(grid_seeds);
    } else if (adv->parsed()) {
      cfg = base_config(g, "adversarial");
    } else if (probe->parsed()) {
      cfg = base_config(g, "monotonicity");
      if (!probe_sizes.empty()) cfg.set("sizes", probe_sizes);
    } else if (train->parsed()) {
      cfg = base_config(g, "train_gan");
      if (!train_variant.empty()) cfg.set("variant", train_variant);
      if (train_epochs > 0) cfg.set("gan.epochs", std::to_string(train_epochs));
      if (!train_seeds.empty()) cfg.seeds = parse_seed_list(train_seeds);
    } else if (comp_cmd->parsed()) {
      cfg = base_config(g, "comp_sweep");
      if (!comp_checkpoint.empty()) cfg.set("checkpoint", comp_checkpoint);
    } else if (dataset->parsed() && dataset_gen->parsed()) {
      cfg = base_config(g, "dataset_gen");
      if (!ds_family.empty()) cfg.set("sampler", ds_family);
      if (ds_n > 0) cfg.set("n", std::to_string(ds_n));
      if (!ds_format.empty()) cfg.set("format", ds_format);
    } else {
      std::fprintf(stderr, "error: no subcommand action\n");
      return 2;
    }
    run_experiment(cfg);
    return 0;
  } catch (const config_error& e) {
    std::fprintf(stderr, "error: kind=config message=%s\n", e.what());
    return 2;
  } catch (const diverged_error& e) {
    std::fprintf(stderr, "error: kind=diverged iteration=%ld message=%s\n", e.iteration, e.what());
    return 3;
  } catch (const parse_error& e) {
    std::fprintf(stderr, "error: kind=parse line=%zu message=%s\n", e.line, e.what());
    return 4;
  } catch (const input_error& e) {
    std::fprintf(stderr, "error: kind=input message=%s\n", e.what());
    return 2;
  } catch (const io_error& e) {
    std::fprintf(stderr, "error: kind=io message=%s\n", e.what());
    return 4;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: kind=internal message=%s\n", e.what());
    return 1;
  }
}
