#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "genmeter/mdl_metric.hpp"
#include "test_util.hpp"

using namespace genmeter;

namespace {

SigmoidStepGenerator sharp_sigmoid() {
  return SigmoidStepGenerator({0.0, 0.0}, {2.0, 1.0}, 50.0);
}

// linear generator matching the sigmoid's endpoints over z in [-1, 1]
LinearGenerator matched_linear() {
  SigmoidStepGenerator sig = sharp_sigmoid();
  auto lo = sig.map_vec(std::vector<double>{-1.0});
  auto hi = sig.map_vec(std::vector<double>{1.0});
  Matrix a(2, 1);
  a.at(0, 0) = (hi[0] - lo[0]) / 2.0;
  a.at(1, 0) = (hi[1] - lo[1]) / 2.0;
  return LinearGenerator(a, {(hi[0] + lo[0]) / 2.0, (hi[1] + lo[1]) / 2.0});
}

}  // namespace

TEST_CASE("sample_path: identity generator has unit speeds") {
  IdentityGenerator gen(LatentSpec{3, LatentSpec::Prior::uniform});
  std::vector<double> z0{0.0, 0.0, 0.0}, z1{1.0, 0.0, 0.0};
  PathSample p = sample_path(gen, z0, z1, 16);
  REQUIRE(p.speeds.size() == 16);
  REQUIRE(p.points.rows == 17);
  for (double s : p.speeds) CHECK(s == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(p.points.at(0, 0) == 0.0);
  CHECK(p.points.at(16, 0) == 1.0);
}

TEST_CASE("sample_path: linear generator speed equals ||A(z1-z0)||") {
  Rng rng(5);
  Matrix a(3, 2);
  for (double& x : a.data) x = rng.uniform(-1, 1);
  LinearGenerator gen(a, {0.0, 0.0, 0.0});
  std::vector<double> z0{0.25, -0.75}, z1{-0.5, 0.5};
  std::vector<double> dz{z1[0] - z0[0], z1[1] - z0[1]};
  double expect = 0.0;
  for (std::size_t r = 0; r < 3; ++r) {
    double v = a.at(r, 0) * dz[0] + a.at(r, 1) * dz[1];
    expect += v * v;
  }
  expect = std::sqrt(expect);
  PathSample p = sample_path(gen, z0, z1, 64);
  for (double s : p.speeds) CHECK(std::abs(s - expect) < 1e-9);
  CHECK(std::abs(path_length(p) - expect) < 1e-9);
  CHECK(sample_path(gen, z0, z1, 8).speeds.size() == 8);
  CHECK_THROWS_AS(sample_path(gen, z0, z1, 1), input_error);
}

TEST_CASE("sample_path: sigmoid speed profile peaks mid-path") {
  SigmoidStepGenerator gen = sharp_sigmoid();
  std::vector<double> z0{-1.0}, z1{1.0};
  PathSample p = sample_path(gen, z0, z1, 256);
  std::size_t argmax = 0;
  for (std::size_t i = 1; i < p.speeds.size(); ++i)
    if (p.speeds[i] > p.speeds[argmax]) argmax = i;
  CHECK(std::abs(static_cast<double>(argmax) - 127.5) <= 1.5);
  // analytic max derivative: ||x1-x0|| * gamma * (z1-z0)/2 / 4 at z = 0
  double norm = std::sqrt(2.0 * 2.0 + 1.0);
  double analytic = norm * 50.0 * 2.0 / 4.0;
  CHECK(max_speed(p) == doctest::Approx(analytic).epsilon(0.05));
}

TEST_CASE("path_length: identity with unit separation is 1; s_max bounds") {
  IdentityGenerator gen(LatentSpec{2, LatentSpec::Prior::uniform});
  std::vector<double> z0{0.0, 0.0}, z1{1.0, 0.0};
  PathSample p = sample_path(gen, z0, z1, 32);
  CHECK(path_length(p) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(max_speed(p) == doctest::Approx(path_length(p)).epsilon(1e-12));

  SigmoidStepGenerator sig = sharp_sigmoid();
  PathSample ps = sample_path(sig, std::vector<double>{-1.0}, std::vector<double>{1.0}, 128);
  CHECK(max_speed(ps) >= path_length(ps));
}

TEST_CASE("sigmoid vs matched linear: equal length, very different s_max") {
  SigmoidStepGenerator sig = sharp_sigmoid();
  LinearGenerator lin = matched_linear();
  std::vector<double> z0{-1.0}, z1{1.0};
  PathSample p_sig = sample_path(sig, z0, z1, 1024);
  PathSample p_lin = sample_path(lin, z0, z1, 1024);
  CHECK(std::abs(path_length(p_sig) - path_length(p_lin)) / path_length(p_lin) < 0.02);
  CHECK(max_speed(p_sig) / max_speed(p_lin) > 5.0);
}

TEST_CASE("refinement: doubling T moves path_length by under 1%") {
  SigmoidStepGenerator sig = sharp_sigmoid();
  LinearGenerator lin = matched_linear();
  std::vector<double> z0{-1.0}, z1{1.0};
  for (const GeneratorModel* gen : {static_cast<const GeneratorModel*>(&sig),
                                    static_cast<const GeneratorModel*>(&lin)}) {
    double l512 = path_length(sample_path(*gen, z0, z1, 512));
    double l1024 = path_length(sample_path(*gen, z0, z1, 1024));
    CHECK(std::abs(l1024 - l512) / l512 < 0.01);
  }
}

TEST_CASE("comp: 1-D identity with uniform prior estimates E|z-z'| = 2/3") {
  IdentityGenerator gen(LatentSpec{1, LatentSpec::Prior::uniform});
  CompEstimate est = comp(gen, 4000, 16, 42);
  CHECK(est.standard_error > 0.0);
  CHECK(std::abs(est.value - 2.0 / 3.0) < 3.0 * est.standard_error);
  CHECK(est.n_pairs == 4000);
}

TEST_CASE("comp: scaling the generator by 2 scales the estimate by exactly 2") {
  IdentityGenerator id1(LatentSpec{1, LatentSpec::Prior::uniform});
  Matrix a(1, 1, 2.0);
  LinearGenerator doubled(a, {0.0});
  CompEstimate base = comp(id1, 500, 16, 9);
  CompEstimate scaled = comp(doubled, 500, 16, 9);
  CHECK(scaled.value == 2.0 * base.value);
}

TEST_CASE("comp: memorizing generator exceeds the matched linear generator") {
  CompEstimate sig = comp(sharp_sigmoid(), 1000, 64, 3);
  CompEstimate lin = comp(matched_linear(), 1000, 64, 3);
  CHECK(sig.value > lin.value);
}

TEST_CASE("comp is deterministic and thread-count independent") {
  SigmoidStepGenerator gen = sharp_sigmoid();
  CompEstimate a = comp(gen, 300, 32, 5, 1);
  CompEstimate b = comp(gen, 300, 32, 5, 2);
  CHECK(a.value == b.value);
  CHECK(a.standard_error == b.standard_error);
}

TEST_CASE("f_gen algebra") {
  CHECK(f_gen(0.0, 3.5, 2.0) == 3.5);
  CHECK(f_gen(1.25, 0.0, 2.0) == 2.5);
  // with equal divergences the ranking does not depend on alpha
  double d = 0.7, c1 = 1.0, c2 = 2.0;
  for (double alpha : {0.1, 1.0, 10.0})
    CHECK(f_gen(d, c1, alpha) < f_gen(d, c2, alpha));
  CHECK_THROWS_AS(f_gen(1.0, 1.0, 0.0), input_error);
  CHECK_THROWS_AS(f_gen(std::nan(""), 1.0, 1.0), input_error);
}

TEST_CASE("speed_variance: zero for linear, large for sharp sigmoid, reversal invariant") {
  LinearGenerator lin = matched_linear();
  std::vector<double> z0{-1.0}, z1{1.0};
  double lv = speed_variance(lin, z0, z1, 64);
  CHECK(lv < 1e-12);
  double sv = speed_variance(sharp_sigmoid(), z0, z1, 64);
  CHECK(sv > 0.0);
  CHECK(sv > 1e3 * std::max(lv, 1e-12));
  double sv_rev = speed_variance(sharp_sigmoid(), z1, z0, 64);
  CHECK(sv == doctest::Approx(sv_rev).epsilon(1e-12));
}

TEST_CASE("pairwise_path_length: identity estimate, constant-speed equality, collapse") {
  IdentityGenerator gen(LatentSpec{1, LatentSpec::Prior::uniform});
  double pl = pairwise_path_length(gen, 4000, 16, 42);
  CompEstimate ce = comp(gen, 4000, 16, 42);
  CHECK(std::abs(pl - 2.0 / 3.0) < 3.0 * ce.standard_error);
  // constant-speed generator: per-path max equals per-path mean
  CHECK(pl == doctest::Approx(ce.value).epsilon(1e-13));

  ConstantGenerator collapse({1.0, -1.0}, LatentSpec{2, LatentSpec::Prior::uniform});
  CHECK(pairwise_path_length(collapse, 200, 16, 1) == 0.0);
}

TEST_CASE("comp dominates pairwise_path_length on matched seeds") {
  SigmoidStepGenerator gen = sharp_sigmoid();
  CompEstimate ce = comp(gen, 500, 64, 17);
  double pl = pairwise_path_length(gen, 500, 64, 17);
  CHECK(ce.value >= pl - 1e-12);
}
