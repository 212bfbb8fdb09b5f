#include "genmeter/metrics_nnd.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "genmeter/adam.hpp"

namespace genmeter {

void NndConfig::validate() const {
  if (eval_window < 1 || iterations < eval_window)
    throw config_error("nnd: need iterations >= eval_window >= 1");
  if (batch_size < 2) throw config_error("nnd: batch_size must be >= 2");
  if (critic_hidden.empty()) throw config_error("nnd: critic needs at least one hidden layer");
  if (lr <= 0.0) throw config_error("nnd: lr must be positive");
}

NndConfig desk_nnd_config() { return NndConfig{}; }

NndConfig paper_nnd_config() {
  NndConfig cfg;
  cfg.critic_hidden = {512, 512, 512};
  cfg.iterations = 20000;
  cfg.lr = 1e-4;
  return cfg;
}

FixedDatasetSource::FixedDatasetSource(Matrix rows) : rows_(std::move(rows)), cursor_(0) {
  if (rows_.rows == 0) throw input_error("FixedDatasetSource: empty dataset");
  order_.resize(rows_.rows);
  std::iota(order_.begin(), order_.end(), std::size_t{0});
  cursor_ = rows_.rows;  // forces a shuffle before the first batch
}

Matrix FixedDatasetSource::next_batch(std::size_t n, Rng& rng) {
  Matrix batch(n, rows_.cols);
  for (std::size_t i = 0; i < n; ++i) {
    if (cursor_ >= order_.size()) {
      shuffle(order_, rng);
      cursor_ = 0;
    }
    auto src = rows_.row(order_[cursor_++]);
    std::copy(src.begin(), src.end(), batch.row(i).begin());
  }
  return batch;
}

std::pair<Matrix, Matrix> holdout_split(const Matrix& rows, Rng& rng, double eval_fraction) {
  std::vector<std::size_t> order(rows.rows);
  std::iota(order.begin(), order.end(), std::size_t{0});
  shuffle(order, rng);
  std::size_t n_eval = static_cast<std::size_t>(std::ceil(eval_fraction * rows.rows));
  n_eval = std::clamp<std::size_t>(n_eval, 1, rows.rows > 1 ? rows.rows - 1 : 1);
  Matrix eval(n_eval, rows.cols), train(rows.rows - n_eval, rows.cols);
  for (std::size_t i = 0; i < n_eval; ++i) {
    auto src = rows.row(order[i]);
    std::copy(src.begin(), src.end(), eval.row(i).begin());
  }
  for (std::size_t i = n_eval; i < rows.rows; ++i) {
    auto src = rows.row(order[i]);
    std::copy(src.begin(), src.end(), train.row(i - n_eval).begin());
  }
  if (train.rows == 0) train = eval;  // degenerate tiny dataset
  return {std::move(train), std::move(eval)};
}

static double batch_mean(const Matrix& out) {
  double s = std::accumulate(out.data.begin(), out.data.end(), 0.0);
  return s / static_cast<double>(out.rows);
}

CriticRun train_critic(const NndConfig& cfg, SampleSource& real, SampleSource& fake,
                       SampleSource& real_eval, SampleSource& fake_eval) {
  cfg.validate();
  if (real.dim() != fake.dim()) throw config_error("train_critic: source dimensions differ");
  const std::size_t dim = real.dim();

  Rng init_rng = Rng::substream(cfg.seed, "critic-init");
  Rng real_rng = Rng::substream(cfg.seed, "real-batches");
  Rng fake_rng = Rng::substream(cfg.seed, "fake-batches");
  Rng gp_rng = Rng::substream(cfg.seed, "gp");
  Rng eval_rng = Rng::substream(cfg.seed, "eval");

  std::vector<std::size_t> widths;
  widths.push_back(dim);
  widths.insert(widths.end(), cfg.critic_hidden.begin(), cfg.critic_hidden.end());
  widths.push_back(1);
  MlpNetwork critic = make_mlp(widths, {Activation::leaky_relu, 0.2}, {Activation::identity, 0.0},
                               init_rng);
  AdamState adam = make_adam(critic, cfg.lr, cfg.adam_beta1, cfg.adam_beta2);

  CriticRun run;
  run.trace.reserve(static_cast<std::size_t>(cfg.iterations));
  double eval_acc = 0.0;
  long eval_count = 0;

  for (long iter = 0; iter < cfg.iterations; ++iter) {
    Matrix real_b = real.next_batch(cfg.batch_size, real_rng);
    Matrix fake_b = fake.next_batch(cfg.batch_size, fake_rng);

    ForwardTrace tr = forward_trace(critic, real_b);
    ForwardTrace tf = forward_trace(critic, fake_b);
    double gap = batch_mean(tr.output()) - batch_mean(tf.output());
    run.trace.push_back(gap);

    // minimize -(gap) + gp_weight * penalty
    Matrix u_real(real_b.rows, 1, -1.0 / static_cast<double>(real_b.rows));
    Matrix u_fake(fake_b.rows, 1, 1.0 / static_cast<double>(fake_b.rows));
    Gradients grads = backward(critic, tr, u_real);
    accumulate(grads, backward(critic, tf, u_fake));
    PenaltyResult gp = gradient_penalty(critic, real_b, fake_b, cfg.gp_mode, gp_rng);
    accumulate(grads, gp.param_grads, cfg.gp_weight);

    if (!std::isfinite(gap) || !std::isfinite(gp.value) || !all_finite(grads))
      throw diverged_error("train_critic: non-finite loss", iter);

    adam_step(adam, critic, grads);

    if (iter >= cfg.iterations - cfg.eval_window) {
      double batch_gap_sum = 0.0;
      for (std::size_t b = 0; b < cfg.eval_batches; ++b) {
        Matrix re = real_eval.next_batch(cfg.batch_size, eval_rng);
        Matrix fe = fake_eval.next_batch(cfg.batch_size, eval_rng);
        batch_gap_sum += batch_mean(forward(critic, re)) - batch_mean(forward(critic, fe));
      }
      eval_acc += batch_gap_sum / static_cast<double>(cfg.eval_batches);
      ++eval_count;
    }
  }
  run.nnd_estimate = eval_acc / static_cast<double>(eval_count);
  run.critic = std::move(critic);
  return run;
}

namespace {

struct SplitSources {
  FixedDatasetSource train;
  FixedDatasetSource eval;
};

SplitSources make_fixed_sources(const NndConfig& cfg, const Matrix& rows, const char* stream) {
  if (cfg.eval_holdout > 0.0) {
    Rng split_rng = Rng::substream(cfg.seed, stream);
    auto [train_rows, eval_rows] = holdout_split(rows, split_rng, cfg.eval_holdout);
    return {FixedDatasetSource(std::move(train_rows)), FixedDatasetSource(std::move(eval_rows))};
  }
  return {FixedDatasetSource(rows), FixedDatasetSource(rows)};
}

}  // namespace

double nnd_streaming(const NndConfig& cfg, const Dataset& test, const GeneratorModel& gen) {
  if (test.dim != gen.data_dim()) throw config_error("nnd_streaming: dimension mismatch");
  SplitSources real = make_fixed_sources(cfg, test.to_matrix(), "real-split");
  GeneratorSource fake(gen);
  GeneratorSource fake_eval(gen);
  return train_critic(cfg, real.train, fake, real.eval, fake_eval).nnd_estimate;
}

double nnd_fixed(const NndConfig& cfg, const Dataset& test, const GeneratorModel& gen,
                 std::size_t m, uint64_t seed) {
  if (test.dim != gen.data_dim()) throw config_error("nnd_fixed: dimension mismatch");
  if (m < cfg.batch_size) throw input_error("nnd_fixed: m must be >= batch_size");
  Rng gen_rng = Rng::substream(seed, "nnd-fixed-dg");
  Matrix dg = gen.sample(m, gen_rng);
  SplitSources real = make_fixed_sources(cfg, test.to_matrix(), "real-split");
  SplitSources fake = make_fixed_sources(cfg, dg, "fake-split");
  return train_critic(cfg, real.train, fake.train, real.eval, fake.eval).nnd_estimate;
}

std::vector<NndGridPoint> nnd_noise_grid(const NndConfig& base, const Dataset& train,
                                         const Dataset& test, const std::vector<double>& epsilons,
                                         const std::vector<std::size_t>& subset_sizes,
                                         const std::vector<uint64_t>& seeds, std::size_t fixed_m,
                                         NoiseKind noise, NoiseBound bound, unsigned threads) {
  for (std::size_t s : subset_sizes)
    if (s > train.size()) throw input_error("nnd_noise_grid: subset size exceeds training set");

  std::vector<NndGridPoint> grid;
  for (bool fixed : {false, true})
    for (double eps : epsilons)
      for (std::size_t size : subset_sizes)
        for (uint64_t seed : seeds) grid.push_back({eps, size, fixed, seed, 0.0});

  std::vector<std::function<void()>> jobs;
  jobs.reserve(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    jobs.push_back([&, i] {
      NndGridPoint& pt = grid[i];
      // random subset of the training data, deterministic per (seed, size)
      Rng sub_rng = Rng::substream(pt.seed, "nnd-grid-subset", pt.subset_size);
      std::vector<std::size_t> order(train.size());
      std::iota(order.begin(), order.end(), std::size_t{0});
      shuffle(order, sub_rng);
      Dataset subset(train.dim);
      for (std::size_t r = 0; r < pt.subset_size; ++r) subset.append_row(train.row(order[r]));
      NoisyMemorizer gen(std::move(subset), pt.epsilon, noise, bound);
      NndConfig cfg = base;
      cfg.seed = pt.seed;
      pt.estimate = pt.fixed_protocol ? nnd_fixed(cfg, test, gen, fixed_m, pt.seed)
                                      : nnd_streaming(cfg, test, gen);
    });
  }
  run_parallel(std::move(jobs), threads);
  return grid;
}

}  // namespace genmeter
