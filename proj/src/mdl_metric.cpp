#include "genmeter/mdl_metric.hpp"

#include <algorithm>
#include <cmath>

namespace genmeter {

PathSample sample_path(const GeneratorModel& gen, std::span<const double> z0,
                       std::span<const double> z1, std::size_t T) {
  if (T < 2) throw input_error("sample_path: T must be >= 2");
  if (z0.size() != gen.latent().dim || z1.size() != gen.latent().dim)
    throw input_error("sample_path: latent dimension mismatch");
  PathSample p;
  p.t_grid.resize(T + 1);
  Matrix zs(T + 1, z0.size());
  for (std::size_t i = 0; i <= T; ++i) {
    double t = static_cast<double>(i) / static_cast<double>(T);
    p.t_grid[i] = t;
    auto z = interpolate_latent(z0, z1, t);
    std::copy(z.begin(), z.end(), zs.row(i).begin());
  }
  p.points = gen.map_batch(zs);
  p.speeds.resize(T);
  const double inv_dt = static_cast<double>(T);
  for (std::size_t i = 0; i < T; ++i)
    p.speeds[i] = euclidean_distance(p.points.row(i + 1), p.points.row(i)) * inv_dt;
  return p;
}

double path_length(const PathSample& p) {
  double dt = 1.0 / static_cast<double>(p.speeds.size());
  double len = 0.0;
  for (double s : p.speeds) len += s * dt;
  return len;
}

double max_speed(const PathSample& p) {
  return *std::max_element(p.speeds.begin(), p.speeds.end());
}

namespace {

// comp and pairwise_path_length must see the same pairs for the same seed.
std::pair<std::vector<double>, std::vector<double>> draw_pair(const GeneratorModel& gen,
                                                              uint64_t seed, std::size_t index) {
  Rng rng = Rng::substream(seed, "path-pair", index);
  auto za = gen.sample_latent(rng);
  auto zb = gen.sample_latent(rng);
  return {std::move(za), std::move(zb)};
}

}  // namespace

CompEstimate comp(const GeneratorModel& gen, std::size_t n_pairs, std::size_t T, uint64_t seed,
                  unsigned threads) {
  if (n_pairs < 1) throw input_error("comp: n_pairs must be >= 1");
  std::vector<double> smax(n_pairs, 0.0);
  std::vector<double> absmax(n_pairs, 0.0);
  const std::size_t chunk = 64;
  std::vector<std::function<void()>> jobs;
  for (std::size_t start = 0; start < n_pairs; start += chunk) {
    std::size_t stop = std::min(n_pairs, start + chunk);
    jobs.push_back([&, start, stop] {
      for (std::size_t i = start; i < stop; ++i) {
        auto [za, zb] = draw_pair(gen, seed, i);
        PathSample p = sample_path(gen, za, zb, T);
        smax[i] = max_speed(p);
        absmax[i] = smax[i];
      }
    });
  }
  run_parallel(std::move(jobs), threads);

  CompEstimate est;
  est.n_pairs = n_pairs;
  est.T = T;
  est.seed = seed;
  double mean = 0.0;
  for (double s : smax) mean += s;
  mean /= static_cast<double>(n_pairs);
  double var = 0.0;
  for (double s : smax) var += (s - mean) * (s - mean);
  var = n_pairs > 1 ? var / static_cast<double>(n_pairs - 1) : 0.0;
  est.value = mean;
  est.standard_error = std::sqrt(var / static_cast<double>(n_pairs));
  est.abs_max_speed = *std::max_element(absmax.begin(), absmax.end());
  return est;
}

double f_gen(double divergence_value, double comp_value, double alpha) {
  if (!(alpha > 0.0)) throw input_error("f_gen: alpha must be positive");
  if (!std::isfinite(divergence_value) || !std::isfinite(comp_value))
    throw input_error("f_gen: non-finite inputs");
  return alpha * divergence_value + comp_value;
}

double speed_variance(const GeneratorModel& gen, std::span<const double> z0,
                      std::span<const double> z1, std::size_t T) {
  PathSample p = sample_path(gen, z0, z1, T);
  double mean = 0.0;
  for (double s : p.speeds) mean += s;
  mean /= static_cast<double>(p.speeds.size());
  double var = 0.0;
  for (double s : p.speeds) var += (s - mean) * (s - mean);
  return var / static_cast<double>(p.speeds.size());
}

double pairwise_path_length(const GeneratorModel& gen, std::size_t n_pairs, std::size_t T,
                            uint64_t seed, unsigned threads) {
  if (n_pairs < 1) throw input_error("pairwise_path_length: n_pairs must be >= 1");
  std::vector<double> lengths(n_pairs, 0.0);
  const std::size_t chunk = 64;
  std::vector<std::function<void()>> jobs;
  for (std::size_t start = 0; start < n_pairs; start += chunk) {
    std::size_t stop = std::min(n_pairs, start + chunk);
    jobs.push_back([&, start, stop] {
      for (std::size_t i = start; i < stop; ++i) {
        auto [za, zb] = draw_pair(gen, seed, i);
        lengths[i] = path_length(sample_path(gen, za, zb, T));
      }
    });
  }
  run_parallel(std::move(jobs), threads);
  double mean = 0.0;
  for (double l : lengths) mean += l;
  return mean / static_cast<double>(n_pairs);
}

}  // namespace genmeter
