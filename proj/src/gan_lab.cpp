#include "genmeter/gan_lab.hpp"

#include <algorithm>
#include <cmath>

#include "genmeter/adam.hpp"
#include "genmeter/mdl_metric.hpp"
#include "genmeter/metrics_classical.hpp"

namespace genmeter {

const char* gan_variant_name(GanVariant v) {
  switch (v) {
    case GanVariant::gan_0gp: return "gan0gp";
    case GanVariant::gan_r1: return "ganr1";
    case GanVariant::wgan_1gp: return "wgan1gp";
    case GanVariant::wgan_0gp: return "wgan0gp";
    case GanVariant::wgan_1gp_const: return "wgan1gp-const";
  }
  return "?";
}

GanVariant parse_gan_variant(const std::string& name) {
  for (GanVariant v : {GanVariant::gan_0gp, GanVariant::gan_r1, GanVariant::wgan_1gp,
                       GanVariant::wgan_0gp, GanVariant::wgan_1gp_const})
    if (name == gan_variant_name(v)) return v;
  throw config_error("unknown GAN variant: " + name);
}

void GanConfig::validate() const {
  if (gp_weight < 0.0) throw config_error("gan: gp_weight must be >= 0");
  bool is_const = variant == GanVariant::wgan_1gp_const;
  if (is_const && const_weight <= 0.0)
    throw config_error("gan: wgan1gp-const needs const_weight > 0");
  if (!is_const && const_weight > 0.0)
    throw config_error("gan: const_weight > 0 requires the wgan1gp-const variant");
  if (is_const && (const_T < 2 || const_pairs < 1))
    throw config_error("gan: const regularizer needs const_T >= 2 and const_pairs >= 1");
  if (epochs < 1 || batch_size < 2) throw config_error("gan: bad epochs/batch_size");
}

GanConfig desk_gan_config(GanVariant v, uint64_t seed, bool lr_collapse) {
  GanConfig cfg;
  cfg.variant = v;
  cfg.seed = seed;
  cfg.lr = lr_collapse ? 1e-3 : 2e-4;
  if (v == GanVariant::wgan_1gp_const) cfg.const_weight = 10.0;
  return cfg;
}

static Matrix sample_latent_batch(const LatentSpec& spec, std::size_t n, Rng& rng) {
  Matrix z(n, spec.dim);
  for (double& x : z.data)
    x = spec.prior == LatentSpec::Prior::uniform ? rng.uniform(-1.0, 1.0) : rng.gaussian();
  return z;
}

static double softplus(double x) {
  return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
}

static double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

ConstSpeedResult const_speed_loss(const MlpNetwork& gen, const Matrix& z_a, const Matrix& z_b,
                                  std::size_t T) {
  if (T < 2) throw input_error("const_speed_loss: T must be >= 2");
  if (z_a.rows == 0 || z_a.rows != z_b.rows || z_a.cols != z_b.cols)
    throw input_error("const_speed_loss: latent pair shape mismatch");
  const std::size_t pairs = z_a.rows;
  const std::size_t grid = T + 1;

  Matrix zs(pairs * grid, z_a.cols);
  for (std::size_t p = 0; p < pairs; ++p) {
    for (std::size_t i = 0; i <= T; ++i) {
      double t = static_cast<double>(i) / static_cast<double>(T);
      auto dst = zs.row(p * grid + i);
      for (std::size_t c = 0; c < z_a.cols; ++c)
        dst[c] = (1.0 - t) * z_a.at(p, c) + t * z_b.at(p, c);
    }
  }

  ForwardTrace trace = forward_trace(gen, zs);
  const Matrix& x = trace.output();
  const double inv_dt = static_cast<double>(T);

  Matrix out_grad(x.rows, x.cols);
  double total = 0.0;
  std::vector<double> speeds(T);
  for (std::size_t p = 0; p < pairs; ++p) {
    double mean = 0.0;
    for (std::size_t i = 0; i < T; ++i) {
      speeds[i] = euclidean_distance(x.row(p * grid + i + 1), x.row(p * grid + i)) * inv_dt;
      mean += speeds[i];
    }
    mean /= static_cast<double>(T);
    double loss = 0.0;
    for (std::size_t i = 0; i < T; ++i) {
      double dev = speeds[i] - mean;
      loss += dev * dev;
      double dist = speeds[i] / inv_dt;
      if (dist <= 0.0) continue;
      // d(value)/d(speed_i) = 2 dev / (T * pairs), and
      // d(speed_i)/d(x_{i+1}) = inv_dt * diff / dist; inv_dt/T = 1.
      double coef = 2.0 * dev / (static_cast<double>(pairs) * dist);
      auto lo = x.row(p * grid + i);
      auto hi = x.row(p * grid + i + 1);
      auto glo = out_grad.row(p * grid + i);
      auto ghi = out_grad.row(p * grid + i + 1);
      for (std::size_t c = 0; c < x.cols; ++c) {
        double u = (hi[c] - lo[c]) * coef;
        ghi[c] += u;
        glo[c] -= u;
      }
    }
    total += loss / static_cast<double>(T);
  }

  ConstSpeedResult res;
  res.value = total / static_cast<double>(pairs);
  res.gen_grads = backward(gen, trace, out_grad);
  return res;
}

namespace {

struct DiscGrads {
  Gradients grads;
  double loss = 0.0;
};

bool is_wgan(GanVariant v) {
  return v == GanVariant::wgan_1gp || v == GanVariant::wgan_0gp ||
         v == GanVariant::wgan_1gp_const;
}

GpMode penalty_mode(GanVariant v) {
  switch (v) {
    case GanVariant::gan_0gp:
    case GanVariant::wgan_0gp:
      return GpMode::zero_centered_gp;
    case GanVariant::gan_r1:
      return GpMode::r1;
    case GanVariant::wgan_1gp:
    case GanVariant::wgan_1gp_const:
      return GpMode::one_centered_gp;
  }
  return GpMode::one_centered_gp;
}

DiscGrads discriminator_step(const GanConfig& cfg, const MlpNetwork& disc, const Matrix& real_b,
                             const Matrix& fake_b, Rng& gp_rng) {
  ForwardTrace tr = forward_trace(disc, real_b);
  ForwardTrace tf = forward_trace(disc, fake_b);
  const double inv_r = 1.0 / static_cast<double>(real_b.rows);
  const double inv_f = 1.0 / static_cast<double>(fake_b.rows);

  Matrix u_real(real_b.rows, 1, 0.0), u_fake(fake_b.rows, 1, 0.0);
  double loss = 0.0;
  if (is_wgan(cfg.variant)) {
    // minimize E[D(fake)] - E[D(real)]
    for (std::size_t i = 0; i < real_b.rows; ++i) {
      loss -= tr.output().at(i, 0) * inv_r;
      u_real.at(i, 0) = -inv_r;
    }
    for (std::size_t i = 0; i < fake_b.rows; ++i) {
      loss += tf.output().at(i, 0) * inv_f;
      u_fake.at(i, 0) = inv_f;
    }
  } else {
    // non-saturating GAN: softplus(-D(real)) + softplus(D(fake))
    for (std::size_t i = 0; i < real_b.rows; ++i) {
      double d = tr.output().at(i, 0);
      loss += softplus(-d) * inv_r;
      u_real.at(i, 0) = -sigmoid(-d) * inv_r;
    }
    for (std::size_t i = 0; i < fake_b.rows; ++i) {
      double d = tf.output().at(i, 0);
      loss += softplus(d) * inv_f;
      u_fake.at(i, 0) = sigmoid(d) * inv_f;
    }
  }

  DiscGrads out;
  out.grads = backward(disc, tr, u_real);
  accumulate(out.grads, backward(disc, tf, u_fake));
  if (cfg.gp_weight > 0.0) {
    PenaltyResult gp = gradient_penalty(disc, real_b, fake_b, penalty_mode(cfg.variant), gp_rng);
    accumulate(out.grads, gp.param_grads, cfg.gp_weight);
    loss += cfg.gp_weight * gp.value;
  }
  out.loss = loss;
  return out;
}

}  // namespace

GanRun train_gan(const GanConfig& cfg, const Dataset& train, const std::string& checkpoint_dir) {
  cfg.validate();
  if (train.size() == 0) throw input_error("train_gan: empty training set");

  Rng gen_init = Rng::substream(cfg.seed, "gen-init");
  Rng disc_init = Rng::substream(cfg.seed, "disc-init");
  Rng real_rng = Rng::substream(cfg.seed, "real-batches");
  Rng latent_rng = Rng::substream(cfg.seed, "latent");
  Rng gp_rng = Rng::substream(cfg.seed, "gp");
  Rng const_rng = Rng::substream(cfg.seed, "const-pairs");

  std::vector<std::size_t> gw{cfg.latent.dim};
  gw.insert(gw.end(), cfg.gen_hidden.begin(), cfg.gen_hidden.end());
  gw.push_back(train.dim);
  MlpNetwork gen = make_mlp(gw, {Activation::tanh, 0.0}, {Activation::identity, 0.0}, gen_init);

  std::vector<std::size_t> dw{train.dim};
  dw.insert(dw.end(), cfg.disc_hidden.begin(), cfg.disc_hidden.end());
  dw.push_back(1);
  MlpNetwork disc =
      make_mlp(dw, {Activation::leaky_relu, 0.2}, {Activation::identity, 0.0}, disc_init);

  AdamState gen_adam = make_adam(gen, cfg.lr, cfg.adam_beta1, cfg.adam_beta2);
  AdamState disc_adam = make_adam(disc, cfg.lr, cfg.adam_beta1, cfg.adam_beta2);

  FixedDatasetSource real(train.to_matrix());
  const std::size_t steps = (train.size() + cfg.batch_size - 1) / cfg.batch_size;

  GanRun run;
  run.latent = cfg.latent;
  for (long epoch = 0; epoch < cfg.epochs; ++epoch) {
    double d_loss_acc = 0.0, g_loss_acc = 0.0, reg_acc = 0.0;
    for (std::size_t step = 0; step < steps; ++step) {
      // discriminator
      Matrix real_b = real.next_batch(cfg.batch_size, real_rng);
      Matrix z = sample_latent_batch(cfg.latent, cfg.batch_size, latent_rng);
      Matrix fake_b = forward(gen, z);
      DiscGrads d = discriminator_step(cfg, disc, real_b, fake_b, gp_rng);
      if (!std::isfinite(d.loss) || !all_finite(d.grads))
        throw diverged_error("train_gan: discriminator loss diverged", epoch);
      adam_step(disc_adam, disc, d.grads);

      // generator
      Matrix z2 = sample_latent_batch(cfg.latent, cfg.batch_size, latent_rng);
      ForwardTrace tg = forward_trace(gen, z2);
      ForwardTrace td = forward_trace(disc, tg.output());
      const double inv_n = 1.0 / static_cast<double>(z2.rows);
      Matrix u(z2.rows, 1, 0.0);
      double g_loss = 0.0;
      for (std::size_t i = 0; i < z2.rows; ++i) {
        double dv = td.output().at(i, 0);
        if (is_wgan(cfg.variant)) {
          g_loss -= dv * inv_n;
          u.at(i, 0) = -inv_n;
        } else {
          g_loss += softplus(-dv) * inv_n;
          u.at(i, 0) = -sigmoid(-dv) * inv_n;
        }
      }
      Matrix fake_grad = input_gradient(disc, td, u);
      Gradients g_grads = backward(gen, tg, fake_grad);

      double reg = 0.0;
      if (cfg.variant == GanVariant::wgan_1gp_const) {
        Matrix za = sample_latent_batch(cfg.latent, cfg.const_pairs, const_rng);
        Matrix zb = sample_latent_batch(cfg.latent, cfg.const_pairs, const_rng);
        ConstSpeedResult cs = const_speed_loss(gen, za, zb, cfg.const_T);
        accumulate(g_grads, cs.gen_grads, cfg.const_weight);
        reg = cs.value;
      }
      if (!std::isfinite(g_loss) || !std::isfinite(reg) || !all_finite(g_grads))
        throw diverged_error("train_gan: generator loss diverged", epoch);
      adam_step(gen_adam, gen, g_grads);

      d_loss_acc += d.loss;
      g_loss_acc += g_loss;
      reg_acc += reg;
    }

    TrainingLogEntry entry;
    entry.epoch = epoch;
    entry.gen_loss = g_loss_acc / static_cast<double>(steps);
    entry.disc_loss = d_loss_acc / static_cast<double>(steps);
    entry.reg_value = reg_acc / static_cast<double>(steps);
    if (!checkpoint_dir.empty() &&
        (epoch % cfg.checkpoint_every == 0 || epoch + 1 == cfg.epochs)) {
      entry.checkpoint = checkpoint_dir + "/epoch_" + std::to_string(epoch) + ".gmtr";
      save_network(gen, entry.checkpoint);
    }
    run.log.push_back(std::move(entry));
  }
  run.generator = std::move(gen);
  return run;
}

// ---- checkpoint evaluation ----

namespace {

template <typename Fn>
void run_metric(const char* name, Fn&& fn) {
  try {
    fn();
  } catch (const diverged_error& e) {
    throw diverged_error(std::string(name) + ": " + e.what(), e.iteration);
  } catch (const input_error& e) {
    throw input_error(std::string(name) + ": " + e.what());
  } catch (const config_error& e) {
    throw config_error(std::string(name) + ": " + e.what());
  }
}

}  // namespace

MetricReport evaluate_checkpoint(const GeneratorModel& gen, const Dataset& train,
                                 const Dataset& test, const EvalSuiteConfig& cfg) {
  MetricReport report;
  uint64_t sample_seed = Rng::substream(cfg.seed, "eval-sample").next_u64();
  Dataset dg = gen.sample_dataset(cfg.sample_n, sample_seed);

  run_metric("kmeans_pr", [&] {
    uint64_t seed = Rng::substream(cfg.seed, "eval-kmeans").next_u64();
    auto res = kmeans_pr(test, dg, cfg.kmeans_k, cfg.beta, seed);
    std::string params = "k=" + std::to_string(cfg.kmeans_k) + ";beta=" + std::to_string(cfg.beta);
    report.add("kmeans_f_beta", res.f_beta, params, seed);
    report.add("kmeans_f_inv_beta", res.f_inv_beta, params, seed);
  });
  run_metric("knn_pr", [&] {
    auto res = knn_pr(test, dg, cfg.knn_k);
    std::string params = "k=" + std::to_string(cfg.knn_k);
    report.add("knn_precision", res.precision, params, sample_seed);
    report.add("knn_recall", res.recall, params, sample_seed);
  });
  run_metric("nnd_fixed", [&] {
    NndConfig nnd = cfg.nnd;
    nnd.seed = Rng::substream(cfg.seed, "eval-nnd-fixed").next_u64();
    report.add("nnd_fixed", nnd_fixed(nnd, test, gen, cfg.nnd_fixed_m, nnd.seed),
               "m=" + std::to_string(cfg.nnd_fixed_m), nnd.seed);
  });
  // the generalization score measures the divergence against the training
  // data: memorizing the training set drives this term to zero while the
  // complexity term blows up
  double nnd_train_value = 0.0;
  run_metric("nnd_fixed_train", [&] {
    NndConfig nnd = cfg.nnd;
    nnd.seed = Rng::substream(cfg.seed, "eval-nnd-fixed-train").next_u64();
    nnd_train_value = nnd_fixed(nnd, train, gen, cfg.nnd_fixed_m, nnd.seed);
    report.add("nnd_fixed_train", nnd_train_value, "m=" + std::to_string(cfg.nnd_fixed_m),
               nnd.seed);
  });
  run_metric("nnd_streaming", [&] {
    NndConfig nnd = cfg.nnd;
    nnd.seed = Rng::substream(cfg.seed, "eval-nnd-streaming").next_u64();
    report.add("nnd_streaming", nnd_streaming(nnd, test, gen), "", nnd.seed);
  });
  double comp_value = 0.0;
  run_metric("comp", [&] {
    uint64_t seed = Rng::substream(cfg.seed, "eval-comp").next_u64();
    CompEstimate est = comp(gen, cfg.comp_pairs, cfg.comp_T, seed);
    std::string params =
        "n_pairs=" + std::to_string(cfg.comp_pairs) + ";T=" + std::to_string(cfg.comp_T);
    comp_value = est.value;
    report.add("comp", est.value, params, seed);
    report.add("comp_stderr", est.standard_error, params, seed);
    report.add("pairwise_path_length", pairwise_path_length(gen, cfg.comp_pairs, cfg.comp_T, seed),
               params, seed);
  });
  run_metric("f_gen", [&] {
    report.add("f_gen", f_gen(nnd_train_value, comp_value, cfg.alpha),
               "alpha=" + std::to_string(cfg.alpha), cfg.seed);
  });
  return report;
}

}  // namespace genmeter
