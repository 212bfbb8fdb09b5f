#pragma once

#include "genmeter/generators.hpp"

namespace genmeter {

// A discretized latent-to-data path: uniform t-grid over the constant-speed
// latent line, mapped points, and forward-difference segment speeds.
struct PathSample {
  std::vector<double> t_grid;   // T+1 values in [0,1]
  Matrix points;                // (T+1) x data_dim
  std::vector<double> speeds;   // T values, ||x_{i+1}-x_i|| / dt
};

PathSample sample_path(const GeneratorModel& gen, std::span<const double> z0,
                       std::span<const double> z1, std::size_t T);

// Left Riemann sum of the speed integral.
double path_length(const PathSample& p);

// Maximum segment speed; a local Lipschitz proxy.
double max_speed(const PathSample& p);

struct CompEstimate {
  double value = 0.0;
  std::size_t n_pairs = 0;
  std::size_t T = 0;
  double standard_error = 0.0;
  uint64_t seed = 0;
  double abs_max_speed = 0.0;  // diagnostic only; too noisy to be the metric
};

// Monte Carlo mean of max_speed over i.i.d. prior pairs. Per-pair PRNG
// substreams make the result independent of scheduling order.
CompEstimate comp(const GeneratorModel& gen, std::size_t n_pairs, std::size_t T, uint64_t seed,
                  unsigned threads = 0);

// alpha * divergence + complexity.
double f_gen(double divergence_value, double comp_value, double alpha);

// Mean squared deviation of segment speeds from their mean; the inner
// expectation of the constant-speed regularizer on one latent pair.
double speed_variance(const GeneratorModel& gen, std::span<const double> z0,
                      std::span<const double> z1, std::size_t T);

// Monte Carlo mean of path_length over the same prior pairs comp draws.
double pairwise_path_length(const GeneratorModel& gen, std::size_t n_pairs, std::size_t T,
                            uint64_t seed, unsigned threads = 0);

}  // namespace genmeter
