#pragma once

#include "genmeter/mlp.hpp"

namespace genmeter {

enum class GpMode { one_centered_gp, zero_centered_gp, r1 };

struct PenaltyResult {
  double value = 0.0;
  Gradients param_grads;
};

// Gradient penalties for critic training. one_centered and zero_centered are
// evaluated at per-pair uniform interpolates between real and fake rows, r1
// at the real rows only. The parameter gradients differentiate the penalty
// through the critic's own input-gradient computation.
PenaltyResult gradient_penalty(const MlpNetwork& net, const Matrix& real_batch,
                               const Matrix& fake_batch, GpMode mode, Rng& rng);

PenaltyResult gradient_penalty(const MlpNetwork& net, const Matrix& real_batch,
                               const Matrix& fake_batch, GpMode mode, uint64_t seed);

const char* gp_mode_name(GpMode mode);

}  // namespace genmeter
