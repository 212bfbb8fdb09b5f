#pragma once

#include <span>

#include "genmeter/mlp.hpp"

namespace genmeter {

// Adam optimizer state over a flat parameter vector. Moments are laid out in
// the same order the network flattens its weights and biases.
struct AdamState {
  std::vector<double> first_moment;
  std::vector<double> second_moment;
  long step = 0;
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps_adam = 1e-8;
};

AdamState make_adam(std::size_t param_count, double lr, double beta1 = 0.9, double beta2 = 0.999);
AdamState make_adam(const MlpNetwork& net, double lr, double beta1 = 0.9, double beta2 = 0.999);

// One bias-corrected update over a raw parameter span.
void adam_step(AdamState& state, std::span<double> params, std::span<const double> grads);

// Same update applied to a whole network against mirrored gradients.
void adam_step(AdamState& state, MlpNetwork& net, const Gradients& grads);

}  // namespace genmeter
