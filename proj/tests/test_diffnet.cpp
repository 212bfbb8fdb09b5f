#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>

#include "genmeter/adam.hpp"
#include "genmeter/gradient_penalty.hpp"
#include "test_util.hpp"

using namespace genmeter;
using namespace genmeter::testutil;

TEST_CASE("matrix kernels against naive loops") {
  Rng rng(7);
  Matrix a = random_batch(5, 3, rng), b = random_batch(3, 4, rng);
  Matrix c = matmul(a, b);
  for (std::size_t i = 0; i < a.rows; ++i)
    for (std::size_t j = 0; j < b.cols; ++j) {
      double expect = 0.0;
      for (std::size_t k = 0; k < a.cols; ++k) expect += a.at(i, k) * b.at(k, j);
      CHECK(c.at(i, j) == doctest::Approx(expect).epsilon(1e-12));
    }
  Matrix bt = transpose(b);
  Matrix c2 = matmul_bt(a, bt);
  for (std::size_t i = 0; i < c.data.size(); ++i)
    CHECK(c2.data[i] == doctest::Approx(c.data[i]).epsilon(1e-12));
  Matrix at = transpose(a);
  Matrix c3 = matmul_at(at, b);
  for (std::size_t i = 0; i < c.data.size(); ++i)
    CHECK(c3.data[i] == doctest::Approx(c.data[i]).epsilon(1e-12));
}

TEST_CASE("rng substreams are deterministic and distinct") {
  Rng a = Rng::substream(42, "alpha");
  Rng b = Rng::substream(42, "alpha");
  Rng c = Rng::substream(42, "beta");
  for (int i = 0; i < 16; ++i) {
    uint64_t va = a.next_u64();
    CHECK(va == b.next_u64());
  }
  CHECK(Rng::substream(42, "alpha").next_u64() != c.next_u64());
  Rng u(3);
  for (int i = 0; i < 1000; ++i) {
    double x = u.uniform();
    CHECK(x >= 0.0);
    CHECK(x < 1.0);
  }
}

TEST_CASE("forward: identity net reproduces input") {
  MlpNetwork net;
  net.layer_widths = {3, 3};
  net.weights.push_back(Matrix::identity(3));
  net.biases.push_back(std::vector<double>(3, 0.0));
  net.activations.push_back({Activation::identity, 0.0});
  Rng rng(1);
  Matrix x = random_batch(4, 3, rng);
  Matrix y = forward(net, x);
  for (std::size_t i = 0; i < x.data.size(); ++i) CHECK(y.data[i] == x.data[i]);
}

TEST_CASE("forward: zero-weight tanh layer yields tanh(bias) rows") {
  MlpNetwork net;
  net.layer_widths = {2, 3};
  net.weights.push_back(Matrix(2, 3));
  net.biases.push_back({0.5, -0.25, 2.0});
  net.activations.push_back({Activation::tanh, 0.0});
  Rng rng(2);
  Matrix x = random_batch(5, 2, rng);
  Matrix y = forward(net, x);
  for (std::size_t r = 0; r < y.rows; ++r)
    for (std::size_t c = 0; c < 3; ++c)
      CHECK(y.at(r, c) == doctest::Approx(std::tanh(net.biases[0][c])).epsilon(1e-15));
}

TEST_CASE("forward: seeded 2-layer net matches the naive re-implementation") {
  Rng init(11);
  MlpNetwork net = make_mlp({4, 8, 3}, {Activation::tanh, 0.0}, {Activation::sigmoid, 0.0}, init);
  Rng rng(12);
  Matrix x = random_batch(6, 4, rng);
  Matrix got = forward(net, x);
  Matrix expect = naive_forward(net, x);
  for (std::size_t i = 0; i < got.data.size(); ++i)
    CHECK(got.data[i] == doctest::Approx(expect.data[i]).epsilon(1e-13));
}

TEST_CASE("forward: shape mismatch raises a configuration error") {
  Rng init(3);
  MlpNetwork net = make_mlp({4, 4, 1}, {Activation::relu, 0.0}, {Activation::identity, 0.0}, init);
  Matrix x(2, 3);
  CHECK_THROWS_AS(forward(net, x), config_error);
}

TEST_CASE("backward: zero output grad gives zero gradients") {
  Rng init(5);
  MlpNetwork net = make_mlp({3, 6, 2}, {Activation::tanh, 0.0}, {Activation::identity, 0.0}, init);
  Rng rng(6);
  Matrix x = random_batch(4, 3, rng);
  ForwardTrace t = forward_trace(net, x);
  Gradients g = backward(net, t, Matrix(4, 2));
  for (const auto& w : g.weights)
    for (double v : w.data) CHECK(v == 0.0);
  for (const auto& b : g.biases)
    for (double v : b) CHECK(v == 0.0);
}

TEST_CASE("backward: linear net weight gradient is g^T x accumulated over the batch") {
  MlpNetwork net;
  net.layer_widths = {3, 2};
  Rng rng(9);
  Matrix w = random_batch(3, 2, rng);
  net.weights.push_back(w);
  net.biases.push_back(std::vector<double>(2, 0.0));
  net.activations.push_back({Activation::identity, 0.0});
  Matrix x = random_batch(5, 3, rng);
  Matrix og = random_batch(5, 2, rng);
  ForwardTrace t = forward_trace(net, x);
  Gradients g = backward(net, t, og);
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j < 2; ++j) {
      double expect = 0.0;
      for (std::size_t r = 0; r < 5; ++r) expect += x.at(r, i) * og.at(r, j);
      CHECK(g.weights[0].at(i, j) == doctest::Approx(expect).epsilon(1e-12));
    }
}

static double weighted_output(const MlpNetwork& net, const Matrix& x, const Matrix& w) {
  Matrix y = forward(net, x);
  double s = 0.0;
  for (std::size_t i = 0; i < y.data.size(); ++i) s += y.data[i] * w.data[i];
  return s;
}

TEST_CASE("backward: random 3-layer nets match central finite differences") {
  for (uint64_t trial = 0; trial < 5; ++trial) {
    Rng init(100 + trial);
    MlpNetwork net = make_mlp({4, 8, 8, 8, 2}, {Activation::tanh, 0.0},
                              {Activation::sigmoid, 0.0}, init);
    Rng rng(200 + trial);
    Matrix x = random_batch(3, 4, rng);
    Matrix og = random_batch(3, 2, rng);
    ForwardTrace t = forward_trace(net, x);
    Gradients analytic = backward(net, t, og);
    Gradients fd = fd_param_gradients(net, [&](const MlpNetwork& n) {
      return weighted_output(n, x, og);
    });
    CHECK(max_rel_error(analytic, fd) < 1e-4);
  }
}

TEST_CASE("backward: input gradients match finite differences") {
  Rng init(31);
  MlpNetwork net = make_mlp({3, 8, 1}, {Activation::tanh, 0.0}, {Activation::identity, 0.0}, init);
  Rng rng(32);
  Matrix x = random_batch(4, 3, rng);
  Matrix og(4, 1, 1.0);
  ForwardTrace t = forward_trace(net, x);
  Matrix gin = input_gradient(net, t, og);
  Matrix gin2;
  backward(net, t, og, &gin2);
  const double h = 1e-6;
  for (std::size_t i = 0; i < x.data.size(); ++i) {
    Matrix xp = x, xm = x;
    xp.data[i] += h;
    xm.data[i] -= h;
    double up = 0.0, down = 0.0;
    Matrix yp = forward(net, xp), ym = forward(net, xm);
    for (double v : yp.data) up += v;
    for (double v : ym.data) down += v;
    double fd = (up - down) / (2.0 * h);
    CHECK(gin.data[i] == doctest::Approx(fd).epsilon(1e-5));
    CHECK(gin2.data[i] == gin.data[i]);
  }
}

TEST_CASE("determinism: identical net/batch/seed gives bit-identical output") {
  Rng init_a(77), init_b(77);
  MlpNetwork a = make_mlp({5, 16, 1}, {Activation::leaky_relu, 0.2},
                          {Activation::identity, 0.0}, init_a);
  MlpNetwork b = make_mlp({5, 16, 1}, {Activation::leaky_relu, 0.2},
                          {Activation::identity, 0.0}, init_b);
  Rng ra(5), rb(5);
  Matrix xa = random_batch(8, 5, ra), xb = random_batch(8, 5, rb);
  Matrix ya = forward(a, xa), yb = forward(b, xb);
  CHECK(ya.data == yb.data);
}

TEST_CASE("shape algebra holds over random architectures") {
  Rng meta(13);
  for (int trial = 0; trial < 20; ++trial) {
    std::size_t depth = 1 + meta.index(4);
    std::vector<std::size_t> widths{1 + meta.index(6)};
    for (std::size_t l = 0; l < depth; ++l) widths.push_back(1 + meta.index(9));
    Rng init(meta.next_u64());
    MlpNetwork net =
        make_mlp(widths, {Activation::relu, 0.0}, {Activation::identity, 0.0}, init);
    std::size_t rows = 1 + meta.index(5);
    Matrix x = random_batch(rows, widths.front(), init);
    ForwardTrace t = forward_trace(net, x);
    CHECK(t.output().rows == rows);
    CHECK(t.output().cols == widths.back());
    Matrix og(rows, widths.back(), 1.0);
    Matrix gin;
    Gradients g = backward(net, t, og, &gin);
    CHECK(gin.rows == rows);
    CHECK(gin.cols == widths.front());
    for (std::size_t l = 0; l < net.num_layers(); ++l) {
      CHECK(g.weights[l].rows == widths[l]);
      CHECK(g.weights[l].cols == widths[l + 1]);
      CHECK(g.biases[l].size() == widths[l + 1]);
    }
  }
}

// ---- Adam ----

TEST_CASE("adam: zero gradient leaves parameters unchanged, step advances") {
  std::vector<double> params{1.5, -2.0};
  std::vector<double> grads{0.0, 0.0};
  AdamState s = make_adam(2, 0.1);
  adam_step(s, params, grads);
  CHECK(params[0] == 1.5);
  CHECK(params[1] == -2.0);
  CHECK(s.step == 1);
}

TEST_CASE("adam: single scalar step matches the hand-computed update") {
  // One step from a fresh state: m = (1-b1) g, v = (1-b2) g^2, both bias
  // corrections cancel, so the update is -lr * g / (|g| + eps).
  double g = 0.3;
  double lr = 0.01;
  std::vector<double> params{2.0};
  std::vector<double> grads{g};
  AdamState s = make_adam(1, lr);
  adam_step(s, params, grads);
  double expect = 2.0 - lr * g / (std::abs(g) + s.eps_adam);
  CHECK(params[0] == doctest::Approx(expect).epsilon(1e-15));
}

TEST_CASE("adam: replayed sequences are deterministic") {
  Rng rng(4);
  std::vector<double> p1{0.5, 0.5, 0.5}, p2{0.5, 0.5, 0.5};
  AdamState s1 = make_adam(3, 0.05), s2 = make_adam(3, 0.05);
  std::vector<std::vector<double>> grad_seq;
  for (int i = 0; i < 10; ++i)
    grad_seq.push_back({rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1)});
  for (const auto& gr : grad_seq) adam_step(s1, p1, gr);
  for (const auto& gr : grad_seq) adam_step(s2, p2, gr);
  CHECK(p1 == p2);
}

// ---- gradient penalty ----

static MlpNetwork constant_net(std::size_t dim, double value) {
  MlpNetwork net;
  net.layer_widths = {dim, 1};
  net.weights.push_back(Matrix(dim, 1));
  net.biases.push_back({value});
  net.activations.push_back({Activation::identity, 0.0});
  return net;
}

TEST_CASE("gradient penalty: constant critic") {
  MlpNetwork net = constant_net(3, 0.7);
  Rng rng(1);
  Matrix real = random_batch(6, 3, rng), fake = random_batch(6, 3, rng);
  CHECK(gradient_penalty(net, real, fake, GpMode::r1, uint64_t{1}).value == 0.0);
  CHECK(gradient_penalty(net, real, fake, GpMode::zero_centered_gp, uint64_t{1}).value == 0.0);
  CHECK(gradient_penalty(net, real, fake, GpMode::one_centered_gp, uint64_t{1}).value ==
        doctest::Approx(1.0));
}

TEST_CASE("gradient penalty: linear critic w = 3 gives r1 = 9") {
  MlpNetwork net;
  net.layer_widths = {1, 1};
  net.weights.push_back(Matrix(1, 1, 3.0));
  net.biases.push_back({0.0});
  net.activations.push_back({Activation::identity, 0.0});
  Rng rng(2);
  Matrix real = random_batch(5, 1, rng), fake = random_batch(5, 1, rng);
  CHECK(gradient_penalty(net, real, fake, GpMode::r1, uint64_t{3}).value ==
        doctest::Approx(9.0).epsilon(1e-12));
}

TEST_CASE("gradient penalty: empty batch raises input error") {
  MlpNetwork net = constant_net(2, 0.0);
  Matrix real(0, 2), fake(0, 2);
  CHECK_THROWS_AS(gradient_penalty(net, real, fake, GpMode::r1, uint64_t{1}), input_error);
}

TEST_CASE("gradient penalty: value and parameter gradients match finite differences") {
  for (GpMode mode : {GpMode::one_centered_gp, GpMode::zero_centered_gp, GpMode::r1}) {
    Rng init(50 + static_cast<int>(mode));
    MlpNetwork net =
        make_mlp({3, 10, 10, 1}, {Activation::tanh, 0.0}, {Activation::identity, 0.0}, init);
    Rng rng(60);
    Matrix real = random_batch(4, 3, rng), fake = random_batch(4, 3, rng);
    uint64_t seed = 99;
    PenaltyResult res = gradient_penalty(net, real, fake, mode, seed);
    Gradients fd = fd_param_gradients(net, [&](const MlpNetwork& n) {
      return gradient_penalty(n, real, fake, mode, seed).value;
    });
    CHECK(max_rel_error(res.param_grads, fd, 1e-5) < 1e-4);
  }
}

// ---- checkpoint io ----

TEST_CASE("checkpoint round-trips networks exactly") {
  Rng init(123);
  MlpNetwork net = make_mlp({3, 7, 5, 2}, {Activation::leaky_relu, 0.1},
                            {Activation::sigmoid, 0.0}, init);
  std::string path = "/tmp/genmeter_test_net.gmtr";
  save_network(net, path);
  MlpNetwork back = load_network(path);
  CHECK(back.layer_widths == net.layer_widths);
  REQUIRE(back.num_layers() == net.num_layers());
  for (std::size_t l = 0; l < net.num_layers(); ++l) {
    CHECK(back.weights[l].data == net.weights[l].data);
    CHECK(back.biases[l] == net.biases[l]);
    CHECK(back.activations[l].act == net.activations[l].act);
    CHECK(back.activations[l].param == net.activations[l].param);
  }
  std::remove(path.c_str());
}
