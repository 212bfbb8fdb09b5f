#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <set>

#include "genmeter/generators.hpp"
#include "test_util.hpp"

using namespace genmeter;
using namespace genmeter::testutil;

static Dataset make_points(std::initializer_list<std::vector<double>> rows) {
  Dataset d(rows.begin()->size());
  for (const auto& r : rows) d.append_row(r);
  return d;
}

TEST_CASE("memorizer: eps = 0 with a single point repeats it exactly") {
  Dataset mem = make_points({{0.25, -1.5}});
  NoisyMemorizer gen(mem, 0.0);
  Dataset out = memorizer_sample(gen, 50, 7);
  REQUIRE(out.size() == 50);
  for (std::size_t r = 0; r < out.size(); ++r) {
    CHECK(out.row(r)[0] == 0.25);
    CHECK(out.row(r)[1] == -1.5);
  }
}

TEST_CASE("memorizer: empty memorized set is rejected") {
  CHECK_THROWS_AS(NoisyMemorizer(Dataset(2), 0.0), input_error);
}

TEST_CASE("memorizer: eps = 0 picks uniformly over D (chi-square at 1%)") {
  const std::size_t k = 8;
  Dataset mem(1);
  for (std::size_t i = 0; i < k; ++i) mem.append_row(std::vector<double>{static_cast<double>(i)});
  NoisyMemorizer gen(mem, 0.0);
  const std::size_t n = 8000;
  Dataset out = memorizer_sample(gen, n, 99);
  std::vector<std::size_t> counts(k, 0);
  for (std::size_t r = 0; r < n; ++r) ++counts[static_cast<std::size_t>(out.row(r)[0])];
  double expect = static_cast<double>(n) / k;
  double chi2 = 0.0;
  for (std::size_t c : counts) {
    double d = static_cast<double>(c) - expect;
    chi2 += d * d / expect;
  }
  // 7 degrees of freedom, 1% critical value
  CHECK(chi2 < 18.475);
}

TEST_CASE("memorizer: eps = 1 uniform noise around the origin") {
  Dataset mem = make_points({{0.0, 0.0}});
  NoisyMemorizer gen(mem, 1.0);
  const std::size_t n = 20000;
  Dataset out = memorizer_sample(gen, n, 4);
  double var0 = 0.0, var1 = 0.0;
  for (std::size_t r = 0; r < n; ++r) {
    CHECK(std::abs(out.row(r)[0]) <= 1.0);
    CHECK(std::abs(out.row(r)[1]) <= 1.0);
    var0 += out.row(r)[0] * out.row(r)[0];
    var1 += out.row(r)[1] * out.row(r)[1];
  }
  var0 /= n;
  var1 /= n;
  // variance of U(-1,1) is 1/3
  CHECK(std::abs(var0 - 1.0 / 3.0) < 0.05 / 3.0);
  CHECK(std::abs(var1 - 1.0 / 3.0) < 0.05 / 3.0);
}

TEST_CASE("memorizer: eps = 0 only ever emits members of D") {
  Rng rng(11);
  Dataset mem(3);
  for (int i = 0; i < 10; ++i)
    mem.append_row(std::vector<double>{rng.uniform(-2, 2), rng.uniform(-2, 2), rng.uniform(-2, 2)});
  std::set<std::vector<double>> members;
  for (std::size_t r = 0; r < mem.size(); ++r) {
    auto row = mem.row(r);
    members.emplace(row.begin(), row.end());
  }
  NoisyMemorizer gen(mem, 0.0);
  Dataset out = memorizer_sample(gen, 500, 5);
  for (std::size_t r = 0; r < out.size(); ++r) {
    auto row = out.row(r);
    CHECK(members.count(std::vector<double>(row.begin(), row.end())) == 1);
  }
}

TEST_CASE("memorizer: number of essentially different modes equals |D| at eps = 0") {
  Rng rng(21);
  const std::size_t k = 16;
  Dataset mem(2);
  for (std::size_t i = 0; i < k; ++i)
    mem.append_row(std::vector<double>{rng.uniform(-1, 1), rng.uniform(-1, 1)});
  NoisyMemorizer gen(mem, 0.0);
  // coupon-collector sized draw
  Dataset out = memorizer_sample(gen, 600, 3);
  std::set<std::vector<double>> distinct;
  for (std::size_t r = 0; r < out.size(); ++r) {
    auto row = out.row(r);
    distinct.emplace(row.begin(), row.end());
  }
  CHECK(distinct.size() == k);
}

TEST_CASE("memorizer: gaussian noise kind uses a gaussian prior") {
  Dataset mem = make_points({{0.0}});
  NoisyMemorizer gen(mem, 1.0, NoiseKind::gaussian);
  CHECK(gen.latent().prior == LatentSpec::Prior::gaussian);
  Dataset out = memorizer_sample(gen, 20000, 8);
  double var = 0.0;
  for (std::size_t r = 0; r < out.size(); ++r) var += out.row(r)[0] * out.row(r)[0];
  var /= static_cast<double>(out.size());
  CHECK(std::abs(var - 1.0) < 0.05);
}

TEST_CASE("generator map is deterministic bitwise") {
  Dataset mem = make_points({{0.5, 0.5}, {-0.5, 0.25}});
  NoisyMemorizer gen(mem, 0.7);
  std::vector<double> z{0.3, -0.6, 0.1};
  auto a = gen.map_vec(z);
  auto b = gen.map_vec(z);
  CHECK(a == b);
}

TEST_CASE("interpolate_latent endpoints, midpoint symmetry and errors") {
  std::vector<double> z0{1.0, -2.0}, z1{-1.0, 2.0};
  CHECK(interpolate_latent(z0, z1, 0.0) == z0);
  CHECK(interpolate_latent(z0, z1, 1.0) == z1);
  auto mid = interpolate_latent(z0, z1, 0.5);
  CHECK(mid[0] == 0.0);
  CHECK(mid[1] == 0.0);
  CHECK_THROWS_AS(interpolate_latent(z0, z1, -0.01), input_error);
  CHECK_THROWS_AS(interpolate_latent(z0, z1, 1.01), input_error);
  CHECK_THROWS_AS(interpolate_latent(z0, std::vector<double>{1.0}, 0.5), input_error);
}

TEST_CASE("interpolated latent path has constant speed to machine precision") {
  std::vector<double> z0{0.4, -1.2, 2.0}, z1{-0.3, 0.8, -1.0};
  const std::size_t T = 64;
  std::vector<double> speeds;
  auto prev = interpolate_latent(z0, z1, 0.0);
  for (std::size_t i = 1; i <= T; ++i) {
    auto cur = interpolate_latent(z0, z1, static_cast<double>(i) / T);
    speeds.push_back(euclidean_distance(cur, prev) * T);
    prev = cur;
  }
  auto [mn, mx] = std::minmax_element(speeds.begin(), speeds.end());
  CHECK(*mx - *mn < 1e-9);
}

TEST_CASE("linear generator has constant path speed") {
  Rng rng(31);
  Matrix a = random_batch(3, 2, rng);
  LinearGenerator gen(a, {0.1, -0.2, 0.3});
  std::vector<double> z0{0.9, -0.9}, z1{-0.7, 0.5};
  const std::size_t T = 128;
  std::vector<double> speeds;
  auto prev = gen.map_vec(interpolate_latent(z0, z1, 0.0));
  for (std::size_t i = 1; i <= T; ++i) {
    auto cur = gen.map_vec(interpolate_latent(z0, z1, static_cast<double>(i) / T));
    speeds.push_back(euclidean_distance(cur, prev) * T);
    prev = cur;
  }
  auto [mn, mx] = std::minmax_element(speeds.begin(), speeds.end());
  CHECK(*mx - *mn < 1e-9);
}

TEST_CASE("sigmoid step generator saturates to its anchors") {
  std::vector<double> x0{0.0, 1.0}, x1{2.0, -1.0};
  double gamma = 50.0;
  SigmoidStepGenerator gen(x0, x1, gamma);
  double far = 100.0 / gamma;
  auto lo = gen.map_vec(std::vector<double>{-far});
  auto hi = gen.map_vec(std::vector<double>{far});
  for (std::size_t c = 0; c < 2; ++c) {
    CHECK(std::abs(lo[c] - x0[c]) < 1e-3);
    CHECK(std::abs(hi[c] - x1[c]) < 1e-3);
  }
}

namespace {

// dense finite-difference speed profile over z in [-1, 1]
std::vector<double> speed_profile(const GeneratorModel& gen, std::size_t T) {
  std::vector<double> z0{-1.0}, z1{1.0};
  std::vector<double> speeds;
  auto prev = gen.map_vec(interpolate_latent(z0, z1, 0.0));
  for (std::size_t i = 1; i <= T; ++i) {
    auto cur = gen.map_vec(interpolate_latent(z0, z1, static_cast<double>(i) / T));
    speeds.push_back(euclidean_distance(cur, prev) * T);
    prev = cur;
  }
  return speeds;
}

}  // namespace

TEST_CASE("sigmoid step generator with small sharpness is nearly constant speed") {
  SigmoidStepGenerator gen({0.0}, {1.0}, 0.1);
  auto speeds = speed_profile(gen, 512);
  auto [mn, mx] = std::minmax_element(speeds.begin(), speeds.end());
  CHECK(*mx / *mn < 1.01);
}

TEST_CASE("sharpness 50 sigmoid matches linear length but spikes in speed") {
  std::vector<double> x0{0.0, 0.0}, x1{2.0, 1.0};
  double gamma = 50.0;
  SigmoidStepGenerator sig(x0, x1, gamma);
  // endpoint-matched linear generator over the same latent segment
  auto a_lo = sig.map_vec(std::vector<double>{-1.0});
  auto a_hi = sig.map_vec(std::vector<double>{1.0});
  Matrix a(2, 1);
  a.at(0, 0) = (a_hi[0] - a_lo[0]) / 2.0;
  a.at(1, 0) = (a_hi[1] - a_lo[1]) / 2.0;
  std::vector<double> b{(a_hi[0] + a_lo[0]) / 2.0, (a_hi[1] + a_lo[1]) / 2.0};
  LinearGenerator lin(a, b);

  const std::size_t T = 4096;  // dense-grid numeric integration
  auto s_sig = speed_profile(sig, T);
  auto s_lin = speed_profile(lin, T);
  double len_sig = 0.0, len_lin = 0.0;
  for (double s : s_sig) len_sig += s / T;
  for (double s : s_lin) len_lin += s / T;
  CHECK(std::abs(len_sig - len_lin) / len_lin < 0.02);
  double max_sig = *std::max_element(s_sig.begin(), s_sig.end());
  double max_lin = *std::max_element(s_lin.begin(), s_lin.end());
  CHECK(max_sig / max_lin > 5.0);
}

TEST_CASE("mlp generator map_batch equals per-row map") {
  Rng init(17);
  MlpNetwork net = make_mlp({2, 8, 3}, {Activation::tanh, 0.0}, {Activation::identity, 0.0}, init);
  MlpGenerator gen(net, LatentSpec{2, LatentSpec::Prior::uniform});
  Rng rng(18);
  Matrix zs = random_batch(5, 2, rng);
  Matrix batch = gen.map_batch(zs);
  for (std::size_t r = 0; r < zs.rows; ++r) {
    auto one = gen.map_vec(zs.row(r));
    for (std::size_t c = 0; c < 3; ++c)
      CHECK(batch.at(r, c) == doctest::Approx(one[c]).epsilon(1e-12));
  }
}

TEST_CASE("memorizer spec round-trips through its serialized form") {
  Dataset mem = make_points({{0.5, -0.25}, {-1.0, 2.0}, {0.0, 0.125}});
  NoisyMemorizer gen(mem, 0.75, NoiseKind::gaussian);
  std::string spec = "/tmp/genmeter_mem.spec", data = "/tmp/genmeter_mem.gmds";
  save_memorizer(gen, spec, data);
  NoisyMemorizer back = load_memorizer(spec);
  CHECK(back.epsilon() == 0.75);
  CHECK(back.noise_kind() == NoiseKind::gaussian);
  REQUIRE(back.memorized().size() == 3);
  for (std::size_t r = 0; r < 3; ++r)
    for (std::size_t c = 0; c < 2; ++c)
      CHECK(back.memorized().row(r)[c] ==
            static_cast<double>(static_cast<float>(mem.row(r)[c])));
  std::remove(spec.c_str());
  std::remove(data.c_str());
}
