#include "genmeter/gradient_penalty.hpp"

#include <cmath>

namespace genmeter {

const char* gp_mode_name(GpMode mode) {
  switch (mode) {
    case GpMode::one_centered_gp: return "1gp";
    case GpMode::zero_centered_gp: return "0gp";
    case GpMode::r1: return "r1";
  }
  return "?";
}

PenaltyResult gradient_penalty(const MlpNetwork& net, const Matrix& real_batch,
                               const Matrix& fake_batch, GpMode mode, Rng& rng) {
  if (real_batch.rows == 0) throw input_error("gradient_penalty: empty real batch");
  if (net.output_width() != 1)
    throw config_error("gradient_penalty: critic must have scalar output");
  if (real_batch.cols != net.input_width())
    throw config_error("gradient_penalty: batch width does not match critic input");

  Matrix points;
  if (mode == GpMode::r1) {
    points = real_batch;
  } else {
    if (fake_batch.rows != real_batch.rows || fake_batch.cols != real_batch.cols)
      throw input_error("gradient_penalty: real/fake batches must pair up");
    if (fake_batch.rows == 0) throw input_error("gradient_penalty: empty fake batch");
    points = Matrix(real_batch.rows, real_batch.cols);
    for (std::size_t r = 0; r < points.rows; ++r) {
      double t = rng.uniform();
      for (std::size_t c = 0; c < points.cols; ++c)
        points.at(r, c) = t * real_batch.at(r, c) + (1.0 - t) * fake_batch.at(r, c);
    }
  }

  ForwardTrace trace = forward_trace(net, points);
  Matrix ones(points.rows, 1, 1.0);
  InputGradChain chain = input_gradient_chain(net, trace, ones);
  const Matrix& g = chain.input_grad;

  const double inv_n = 1.0 / static_cast<double>(points.rows);
  double value = 0.0;
  Matrix v(g.rows, g.cols);
  for (std::size_t r = 0; r < g.rows; ++r) {
    double norm2 = 0.0;
    for (std::size_t c = 0; c < g.cols; ++c) norm2 += g.at(r, c) * g.at(r, c);
    double norm = std::sqrt(norm2);
    if (mode == GpMode::one_centered_gp) {
      double d = norm - 1.0;
      value += d * d;
      if (norm > 0.0) {
        double coef = 2.0 * d / norm * inv_n;
        for (std::size_t c = 0; c < g.cols; ++c) v.at(r, c) = coef * g.at(r, c);
      }
    } else {
      value += norm2;
      for (std::size_t c = 0; c < g.cols; ++c) v.at(r, c) = 2.0 * g.at(r, c) * inv_n;
    }
  }
  value *= inv_n;

  PenaltyResult res;
  res.value = value;
  res.param_grads = grad_of_input_gradient(net, trace, ones, v, &chain);
  return res;
}

PenaltyResult gradient_penalty(const MlpNetwork& net, const Matrix& real_batch,
                               const Matrix& fake_batch, GpMode mode, uint64_t seed) {
  Rng rng = Rng::substream(seed, "gradient-penalty");
  return gradient_penalty(net, real_batch, fake_batch, mode, rng);
}

}  // namespace genmeter
