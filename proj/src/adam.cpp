#include "genmeter/adam.hpp"

#include <cmath>

namespace genmeter {

AdamState make_adam(std::size_t param_count, double lr, double beta1, double beta2) {
  if (beta1 < 0.0 || beta1 >= 1.0 || beta2 < 0.0 || beta2 >= 1.0)
    throw config_error("adam: betas must be in [0, 1)");
  AdamState s;
  s.first_moment.assign(param_count, 0.0);
  s.second_moment.assign(param_count, 0.0);
  s.lr = lr;
  s.beta1 = beta1;
  s.beta2 = beta2;
  return s;
}

AdamState make_adam(const MlpNetwork& net, double lr, double beta1, double beta2) {
  return make_adam(net.param_count(), lr, beta1, beta2);
}

static void adam_update_range(AdamState& s, std::size_t offset, double* params,
                              const double* grads, std::size_t n, double corr1, double corr2) {
  double* m = s.first_moment.data() + offset;
  double* v = s.second_moment.data() + offset;
  for (std::size_t i = 0; i < n; ++i) {
    m[i] = s.beta1 * m[i] + (1.0 - s.beta1) * grads[i];
    v[i] = s.beta2 * v[i] + (1.0 - s.beta2) * grads[i] * grads[i];
    double mhat = m[i] / corr1;
    double vhat = v[i] / corr2;
    params[i] -= s.lr * mhat / (std::sqrt(vhat) + s.eps_adam);
  }
}

void adam_step(AdamState& state, std::span<double> params, std::span<const double> grads) {
  if (params.size() != grads.size() || params.size() != state.first_moment.size())
    throw config_error("adam_step: parameter/gradient/state size mismatch");
  ++state.step;
  double corr1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.step));
  double corr2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.step));
  adam_update_range(state, 0, params.data(), grads.data(), params.size(), corr1, corr2);
}

void adam_step(AdamState& state, MlpNetwork& net, const Gradients& grads) {
  if (state.first_moment.size() != net.param_count())
    throw config_error("adam_step: state sized for a different network");
  ++state.step;
  double corr1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.step));
  double corr2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.step));
  std::size_t offset = 0;
  for (std::size_t l = 0; l < net.num_layers(); ++l) {
    adam_update_range(state, offset, net.weights[l].data.data(), grads.weights[l].data.data(),
                      net.weights[l].data.size(), corr1, corr2);
    offset += net.weights[l].data.size();
    adam_update_range(state, offset, net.biases[l].data(), grads.biases[l].data(),
                      net.biases[l].size(), corr1, corr2);
    offset += net.biases[l].size();
  }
}

}  // namespace genmeter
