#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "genmeter/matrix.hpp"

namespace genmeter {

enum class Activation : uint32_t { identity = 0, relu = 1, leaky_relu = 2, tanh = 3, sigmoid = 4 };

struct LayerSpec {
  Activation act = Activation::identity;
  double param = 0.0;  // leaky_relu slope; unused otherwise
};

// A plain fully connected network. Layer l maps width[l] -> width[l+1] with
// weights[l] of shape (width[l] x width[l+1]) acting on row-major batches:
// Z_l = A_l * W_l + b_l, A_{l+1} = act_l(Z_l).
struct MlpNetwork {
  std::vector<std::size_t> layer_widths;
  std::vector<Matrix> weights;
  std::vector<std::vector<double>> biases;
  std::vector<LayerSpec> activations;

  std::size_t num_layers() const { return weights.size(); }
  std::size_t input_width() const { return layer_widths.front(); }
  std::size_t output_width() const { return layer_widths.back(); }
  std::size_t param_count() const;
};

// Glorot-uniform initialized network; hidden layers share one activation,
// the output layer gets its own (identity for critics and generators).
MlpNetwork make_mlp(const std::vector<std::size_t>& widths, LayerSpec hidden, LayerSpec output,
                    Rng& rng);

struct ForwardTrace {
  std::vector<Matrix> pre;  // Z_l, one per layer
  std::vector<Matrix> act;  // act[0] = input, act[l+1] = activation of Z_l
  const Matrix& output() const { return act.back(); }
};

Matrix forward(const MlpNetwork& net, const Matrix& batch);
ForwardTrace forward_trace(const MlpNetwork& net, const Matrix& batch);

// Per-parameter gradients, mirroring MlpNetwork's weights/biases.
struct Gradients {
  std::vector<Matrix> weights;
  std::vector<std::vector<double>> biases;
};

Gradients zero_gradients(const MlpNetwork& net);
void accumulate(Gradients& into, const Gradients& g, double scale = 1.0);
void scale_gradients(Gradients& g, double scale);
bool all_finite(const Gradients& g);

// Reverse-mode pass. output_grad holds d(scalar)/d(output); returns gradients
// w.r.t. every weight and bias, and optionally d(scalar)/d(input batch).
Gradients backward(const MlpNetwork& net, const ForwardTrace& trace, const Matrix& output_grad,
                   Matrix* input_grad = nullptr);

// Just the input gradient (delta chain only, no parameter gradients).
Matrix input_gradient(const MlpNetwork& net, const ForwardTrace& trace, const Matrix& output_grad);

// The full delta chain of one input-gradient pass, reusable by the double
// backward so the penalty path does not recompute it.
struct InputGradChain {
  std::vector<Matrix> prime;   // act'(Z_l)
  std::vector<Matrix> delta;   // D_l
  std::vector<Matrix> message; // E_l = D_{l+1} W_{l+1}^T
  Matrix input_grad;
};

InputGradChain input_gradient_chain(const MlpNetwork& net, const ForwardTrace& trace,
                                    const Matrix& output_grad);

// Double backward: gradients w.r.t. parameters of S = sum(V . G) where
// G = input_gradient(net, trace, U) and U, V are held constant. This is what
// differentiating a gradient-norm penalty through the critic requires.
Gradients grad_of_input_gradient(const MlpNetwork& net, const ForwardTrace& trace, const Matrix& U,
                                 const Matrix& V, const InputGradChain* chain = nullptr);

// Binary checkpoint container ("GMTR1"): widths, activation codes, then
// weights and biases as little-endian 64-bit reals in layer order.
void save_network(const MlpNetwork& net, const std::string& path);
MlpNetwork load_network(const std::string& path);

}  // namespace genmeter
