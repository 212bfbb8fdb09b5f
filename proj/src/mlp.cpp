#include "genmeter/mlp.hpp"

#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>

namespace genmeter {

std::size_t MlpNetwork::param_count() const {
  std::size_t n = 0;
  for (std::size_t l = 0; l < weights.size(); ++l) n += weights[l].data.size() + biases[l].size();
  return n;
}

MlpNetwork make_mlp(const std::vector<std::size_t>& widths, LayerSpec hidden, LayerSpec output,
                    Rng& rng) {
  if (widths.size() < 2) throw config_error("make_mlp: need at least input and output widths");
  MlpNetwork net;
  net.layer_widths = widths;
  for (std::size_t l = 0; l + 1 < widths.size(); ++l) {
    std::size_t fan_in = widths[l], fan_out = widths[l + 1];
    double bound = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
    Matrix w(fan_in, fan_out);
    for (double& x : w.data) x = rng.uniform(-bound, bound);
    net.weights.push_back(std::move(w));
    net.biases.emplace_back(fan_out, 0.0);
    net.activations.push_back(l + 2 == widths.size() ? output : hidden);
  }
  return net;
}

static void apply_activation(const LayerSpec& spec, const Matrix& z, Matrix& out) {
  out = z;
  switch (spec.act) {
    case Activation::identity:
      break;
    case Activation::relu:
      for (double& x : out.data) x = x > 0.0 ? x : 0.0;
      break;
    case Activation::leaky_relu:
      for (double& x : out.data) x = x > 0.0 ? x : spec.param * x;
      break;
    case Activation::tanh:
      for (double& x : out.data) x = std::tanh(x);
      break;
    case Activation::sigmoid:
      for (double& x : out.data) x = 1.0 / (1.0 + std::exp(-x));
      break;
  }
}

// First derivative of the activation, elementwise from pre-activations.
static Matrix activation_prime(const LayerSpec& spec, const Matrix& z) {
  Matrix d(z.rows, z.cols);
  switch (spec.act) {
    case Activation::identity:
      for (double& x : d.data) x = 1.0;
      break;
    case Activation::relu:
      for (std::size_t i = 0; i < z.data.size(); ++i) d.data[i] = z.data[i] > 0.0 ? 1.0 : 0.0;
      break;
    case Activation::leaky_relu:
      for (std::size_t i = 0; i < z.data.size(); ++i)
        d.data[i] = z.data[i] > 0.0 ? 1.0 : spec.param;
      break;
    case Activation::tanh:
      for (std::size_t i = 0; i < z.data.size(); ++i) {
        double t = std::tanh(z.data[i]);
        d.data[i] = 1.0 - t * t;
      }
      break;
    case Activation::sigmoid:
      for (std::size_t i = 0; i < z.data.size(); ++i) {
        double s = 1.0 / (1.0 + std::exp(-z.data[i]));
        d.data[i] = s * (1.0 - s);
      }
      break;
  }
  return d;
}

// m[i] *= act'(z[i]) without materializing the prime matrix.
static void apply_prime_inplace(const LayerSpec& spec, const Matrix& z, Matrix& m) {
  switch (spec.act) {
    case Activation::identity:
      break;
    case Activation::relu:
      for (std::size_t i = 0; i < m.data.size(); ++i)
        if (z.data[i] <= 0.0) m.data[i] = 0.0;
      break;
    case Activation::leaky_relu:
      for (std::size_t i = 0; i < m.data.size(); ++i)
        if (z.data[i] <= 0.0) m.data[i] *= spec.param;
      break;
    case Activation::tanh:
      for (std::size_t i = 0; i < m.data.size(); ++i) {
        double t = std::tanh(z.data[i]);
        m.data[i] *= 1.0 - t * t;
      }
      break;
    case Activation::sigmoid:
      for (std::size_t i = 0; i < m.data.size(); ++i) {
        double s = 1.0 / (1.0 + std::exp(-z.data[i]));
        m.data[i] *= s * (1.0 - s);
      }
      break;
  }
}

// Second derivative; zero almost everywhere for the piecewise-linear ones.
static Matrix activation_second(const LayerSpec& spec, const Matrix& z) {
  Matrix d(z.rows, z.cols);
  switch (spec.act) {
    case Activation::identity:
    case Activation::relu:
    case Activation::leaky_relu:
      break;
    case Activation::tanh:
      for (std::size_t i = 0; i < z.data.size(); ++i) {
        double t = std::tanh(z.data[i]);
        d.data[i] = -2.0 * t * (1.0 - t * t);
      }
      break;
    case Activation::sigmoid:
      for (std::size_t i = 0; i < z.data.size(); ++i) {
        double s = 1.0 / (1.0 + std::exp(-z.data[i]));
        d.data[i] = s * (1.0 - s) * (1.0 - 2.0 * s);
      }
      break;
  }
  return d;
}

static void check_input(const MlpNetwork& net, const Matrix& batch) {
  if (batch.cols != net.input_width())
    throw config_error("forward: batch width " + std::to_string(batch.cols) +
                       " does not match net input width " + std::to_string(net.input_width()));
}

ForwardTrace forward_trace(const MlpNetwork& net, const Matrix& batch) {
  check_input(net, batch);
  ForwardTrace t;
  t.act.reserve(net.num_layers() + 1);
  t.pre.reserve(net.num_layers());
  t.act.push_back(batch);
  for (std::size_t l = 0; l < net.num_layers(); ++l) {
    Matrix z = matmul(t.act.back(), net.weights[l]);
    const auto& b = net.biases[l];
    for (std::size_t r = 0; r < z.rows; ++r) {
      double* zr = z.data.data() + r * z.cols;
      for (std::size_t c = 0; c < z.cols; ++c) zr[c] += b[c];
    }
    Matrix a;
    apply_activation(net.activations[l], z, a);
    t.pre.push_back(std::move(z));
    t.act.push_back(std::move(a));
  }
  return t;
}

Matrix forward(const MlpNetwork& net, const Matrix& batch) {
  return forward_trace(net, batch).output();
}

Gradients zero_gradients(const MlpNetwork& net) {
  Gradients g;
  for (std::size_t l = 0; l < net.num_layers(); ++l) {
    g.weights.emplace_back(net.weights[l].rows, net.weights[l].cols);
    g.biases.emplace_back(net.biases[l].size(), 0.0);
  }
  return g;
}

void accumulate(Gradients& into, const Gradients& g, double scale) {
  for (std::size_t l = 0; l < into.weights.size(); ++l) {
    for (std::size_t i = 0; i < into.weights[l].data.size(); ++i)
      into.weights[l].data[i] += scale * g.weights[l].data[i];
    for (std::size_t i = 0; i < into.biases[l].size(); ++i)
      into.biases[l][i] += scale * g.biases[l][i];
  }
}

void scale_gradients(Gradients& g, double scale) {
  for (auto& w : g.weights) scale_inplace(w, scale);
  for (auto& b : g.biases)
    for (double& x : b) x *= scale;
}

bool all_finite(const Gradients& g) {
  for (const auto& w : g.weights)
    if (!all_finite(w)) return false;
  for (const auto& b : g.biases)
    for (double x : b)
      if (!std::isfinite(x)) return false;
  return true;
}

static std::vector<double> column_sums(const Matrix& m) {
  std::vector<double> s(m.cols, 0.0);
  for (std::size_t r = 0; r < m.rows; ++r) {
    const double* row = m.data.data() + r * m.cols;
    for (std::size_t c = 0; c < m.cols; ++c) s[c] += row[c];
  }
  return s;
}

Gradients backward(const MlpNetwork& net, const ForwardTrace& trace, const Matrix& output_grad,
                   Matrix* input_grad) {
  const std::size_t L = net.num_layers();
  if (output_grad.rows != trace.output().rows || output_grad.cols != trace.output().cols)
    throw config_error("backward: output_grad shape mismatch");
  Gradients g = zero_gradients(net);
  Matrix delta = output_grad;
  apply_prime_inplace(net.activations[L - 1], trace.pre[L - 1], delta);
  for (std::size_t l = L; l-- > 0;) {
    matmul_at_acc(trace.act[l], delta, g.weights[l]);
    g.biases[l] = column_sums(delta);
    if (l > 0) {
      delta = matmul_bt(delta, net.weights[l]);
      apply_prime_inplace(net.activations[l - 1], trace.pre[l - 1], delta);
    } else if (input_grad) {
      *input_grad = matmul_bt(delta, net.weights[0]);
    }
  }
  return g;
}

Matrix input_gradient(const MlpNetwork& net, const ForwardTrace& trace, const Matrix& output_grad) {
  const std::size_t L = net.num_layers();
  if (output_grad.rows != trace.output().rows || output_grad.cols != trace.output().cols)
    throw config_error("input_gradient: output_grad shape mismatch");
  Matrix delta = output_grad;
  apply_prime_inplace(net.activations[L - 1], trace.pre[L - 1], delta);
  for (std::size_t l = L - 1; l > 0; --l) {
    delta = matmul_bt(delta, net.weights[l]);
    apply_prime_inplace(net.activations[l - 1], trace.pre[l - 1], delta);
  }
  return matmul_bt(delta, net.weights[0]);
}

InputGradChain input_gradient_chain(const MlpNetwork& net, const ForwardTrace& trace,
                                    const Matrix& output_grad) {
  const std::size_t L = net.num_layers();
  if (output_grad.rows != trace.output().rows || output_grad.cols != trace.output().cols)
    throw config_error("input_gradient_chain: output_grad shape mismatch");
  InputGradChain c;
  c.prime.resize(L);
  c.delta.resize(L);
  c.message.resize(L > 0 ? L - 1 : 0);
  for (std::size_t l = 0; l < L; ++l)
    c.prime[l] = activation_prime(net.activations[l], trace.pre[l]);
  c.delta[L - 1] = hadamard(output_grad, c.prime[L - 1]);
  for (std::size_t l = L - 1; l > 0; --l) {
    c.message[l - 1] = matmul_bt(c.delta[l], net.weights[l]);
    c.delta[l - 1] = hadamard(c.message[l - 1], c.prime[l - 1]);
  }
  c.input_grad = matmul_bt(c.delta[0], net.weights[0]);
  return c;
}

// Reverse-mode sweep over the combined forward + input-gradient computation.
// Notation: D_l is the delta carried by the first backward pass at layer l,
// E_l the pre-activation-scaled message D_{l+1} W_{l+1}^T, S_l = act'(Z_l).
Gradients grad_of_input_gradient(const MlpNetwork& net, const ForwardTrace& trace, const Matrix& U,
                                 const Matrix& V, const InputGradChain* chain) {
  const std::size_t L = net.num_layers();
  if (V.rows != trace.act[0].rows || V.cols != trace.act[0].cols)
    throw config_error("grad_of_input_gradient: V shape mismatch");

  InputGradChain local;
  if (!chain) {
    local = input_gradient_chain(net, trace, U);
    chain = &local;
  }
  const std::vector<Matrix>& S = chain->prime;
  const std::vector<Matrix>& D = chain->delta;
  const std::vector<Matrix>& E = chain->message;

  Gradients g = zero_gradients(net);

  // Adjoints of the backward chain: G = D_0 W_0^T with G-bar = V.
  std::vector<Matrix> Dbar(L), Sbar(L);
  matmul_at_acc(V, D[0], g.weights[0]);
  Dbar[0] = matmul(V, net.weights[0]);
  for (std::size_t l = 0; l + 1 < L; ++l) {
    Matrix Ebar = hadamard(Dbar[l], S[l]);
    Sbar[l] = hadamard(Dbar[l], E[l]);
    matmul_at_acc(Ebar, D[l + 1], g.weights[l + 1]);
    Dbar[l + 1] = matmul(Ebar, net.weights[l + 1]);
  }
  Sbar[L - 1] = hadamard(Dbar[L - 1], U);

  // Adjoints of the forward chain: S_l = act'(Z_l) and A_{l+1} = act(Z_l).
  Matrix Abar;  // adjoint of act[l+1], propagated downward
  for (std::size_t l = L; l-- > 0;) {
    Matrix Zbar = hadamard(Sbar[l], activation_second(net.activations[l], trace.pre[l]));
    if (l + 1 < L) {
      apply_prime_inplace(net.activations[l], trace.pre[l], Abar);
      add_inplace(Zbar, Abar);
    }
    matmul_at_acc(trace.act[l], Zbar, g.weights[l]);
    auto bs = column_sums(Zbar);
    for (std::size_t i = 0; i < bs.size(); ++i) g.biases[l][i] += bs[i];
    if (l > 0) Abar = matmul_bt(Zbar, net.weights[l]);
  }
  return g;
}

// ---- checkpoint container ----

static constexpr char kMagic[5] = {'G', 'M', 'T', 'R', '1'};

template <typename T>
static void write_pod(std::ofstream& f, const T& v) {
  f.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
static void read_pod(std::ifstream& f, T& v) {
  f.read(reinterpret_cast<char*>(&v), sizeof(T));
}

void save_network(const MlpNetwork& net, const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw io_error("cannot open for writing: " + path);
  f.write(kMagic, sizeof(kMagic));
  write_pod(f, static_cast<uint32_t>(net.layer_widths.size()));
  for (auto w : net.layer_widths) write_pod(f, static_cast<uint32_t>(w));
  for (const auto& a : net.activations) {
    write_pod(f, static_cast<uint32_t>(a.act));
    write_pod(f, a.param);
  }
  for (std::size_t l = 0; l < net.num_layers(); ++l) {
    f.write(reinterpret_cast<const char*>(net.weights[l].data.data()),
            static_cast<std::streamsize>(net.weights[l].data.size() * sizeof(double)));
    f.write(reinterpret_cast<const char*>(net.biases[l].data()),
            static_cast<std::streamsize>(net.biases[l].size() * sizeof(double)));
  }
  if (!f) throw io_error("write failed: " + path);
}

MlpNetwork load_network(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw io_error("cannot open: " + path);
  char magic[5];
  f.read(magic, sizeof(magic));
  if (!f || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
    throw io_error("not a network checkpoint: " + path);
  uint32_t n_widths = 0;
  read_pod(f, n_widths);
  if (n_widths < 2 || n_widths > 64) throw io_error("corrupt checkpoint header: " + path);
  MlpNetwork net;
  for (uint32_t i = 0; i < n_widths; ++i) {
    uint32_t w = 0;
    read_pod(f, w);
    net.layer_widths.push_back(w);
  }
  for (uint32_t l = 0; l + 1 < n_widths; ++l) {
    uint32_t code = 0;
    double param = 0.0;
    read_pod(f, code);
    read_pod(f, param);
    if (code > static_cast<uint32_t>(Activation::sigmoid))
      throw io_error("unknown activation code in checkpoint: " + path);
    net.activations.push_back({static_cast<Activation>(code), param});
  }
  for (uint32_t l = 0; l + 1 < n_widths; ++l) {
    Matrix w(net.layer_widths[l], net.layer_widths[l + 1]);
    f.read(reinterpret_cast<char*>(w.data.data()),
           static_cast<std::streamsize>(w.data.size() * sizeof(double)));
    std::vector<double> b(net.layer_widths[l + 1]);
    f.read(reinterpret_cast<char*>(b.data()),
           static_cast<std::streamsize>(b.size() * sizeof(double)));
    net.weights.push_back(std::move(w));
    net.biases.push_back(std::move(b));
  }
  if (!f) throw io_error("truncated checkpoint: " + path);
  return net;
}

}  // namespace genmeter
