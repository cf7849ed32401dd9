#include <gtest/gtest.h>

#include "abdd/boosting.hpp"
#include "abdd/error.hpp"
#include "abdd/ltf.hpp"
#include "abdd/verify.hpp"
#include "support.hpp"

using namespace abdd;
using abdd::testing::Rng;

namespace {

Circuit compiled(const ThresholdFunction& f) {
  BoostConfig cfg;
  cfg.epsilon = std::ldexp(1.0, -static_cast<int>(f.dimension()));
  cfg.hypotheses = lifted_hypotheses(f.dimension());
  return dd_to_circuit(boost(full_sample(f), cfg).diagram);
}

Circuit projection_circuit(std::size_t n, std::size_t i) {
  CircuitBuilder b;
  for (std::size_t k = 0; k < n; ++k) b.declare_input(input_name(k));
  return b.build(b.var(input_name(i)));
}

std::vector<BitVector> cube(std::size_t n) {
  std::vector<BitVector> v;
  for (std::uint64_t i = 0; i < (std::uint64_t{1} << n); ++i) v.push_back(BitVector::from_index(i, n));
  return v;
}

}  // namespace

TEST(InstanceRobustness, Projection) {
  const auto f = projection_circuit(3, 0);
  for (const auto& x : cube(3)) EXPECT_EQ(instance_robustness(f, x).radius, 1u);
}

TEST(InstanceRobustness, AndLike) {
  const auto f = compiled({{1, 1}, -1});
  EXPECT_EQ(instance_robustness(f, BitVector({1, 1})).radius, 1u);
  EXPECT_EQ(instance_robustness(f, BitVector({-1, -1})).radius, 2u);
  EXPECT_EQ(instance_robustness(f, BitVector({1, 1})).label, 1);
}

TEST(InstanceRobustness, TrivialFunction) {
  CircuitBuilder b;
  b.declare_input("x0");
  const auto t = b.build(b.constant(true));
  EXPECT_THROW(instance_robustness(t, BitVector({1})), TrivialFunction);
}

TEST(InstanceRobustness, MatchesBruteForceOnCompiledLtfs) {
  Rng rng(30);
  for (int trial = 0; trial < 10; ++trial) {
    const std::size_t n = 2 + trial % 7;
    const auto ltf = abdd::testing::random_ltf(rng, n);
    const auto f = compiled(ltf);
    const auto nf = negate(f);
    for (const auto& x : cube(n)) {
      const auto want = abdd::testing::brute_force_radius(
          [&](const BitVector& y) { return eval_ltf(ltf, y) > 0; }, x);
      ASSERT_EQ(instance_robustness(f, x).radius, want);
      ASSERT_EQ(instance_robustness(nf, x).radius, want);  // complement symmetry
    }
  }
}

TEST(SampleRobustness, Aggregates) {
  const auto f = projection_circuit(4, 2);
  const auto rep = sample_robustness(f, cube(4));
  EXPECT_DOUBLE_EQ(rep.value, 1.0);
  EXPECT_EQ(rep.instances.size(), 16u);

  const auto g = compiled({{1, 1}, -1});
  const auto one = sample_robustness(g, {BitVector({-1, -1})});
  EXPECT_DOUBLE_EQ(one.value, 2.0);
  EXPECT_THROW(sample_robustness(g, {}), InputError);
}

TEST(SampleRobustness, ParallelMatchesSequential) {
  Rng rng(31);
  const auto f = compiled(abdd::testing::random_ltf(rng, 7));
  const auto pts = cube(7);
  RobustnessOptions seq, par;
  par.jobs = 4;
  const auto a = sample_robustness(f, pts, seq);
  const auto b = sample_robustness(f, pts, par);
  EXPECT_EQ(to_json(a), to_json(b));
}

TEST(ModelRobustness, Examples) {
  EXPECT_DOUBLE_EQ(model_robustness(projection_circuit(2, 0), 2), 1.0);
  const auto g = compiled({{1, 1}, -1});
  EXPECT_DOUBLE_EQ(model_robustness(g, 2), 1.25);
  EXPECT_DOUBLE_EQ(model_robustness(g, 2), sample_robustness(g, cube(2)).value);
  EXPECT_THROW(model_robustness(g, 20), ResourceError);
}

TEST(ModelRobustness, EqualsSampleRobustnessOnFullCube) {
  Rng rng(32);
  for (int trial = 0; trial < 5; ++trial) {
    const std::size_t n = 3 + trial;
    const auto ltf = abdd::testing::random_ltf(rng, n);
    const auto f = compiled(ltf);
    double brute = 0;
    for (const auto& x : cube(n))
      brute += static_cast<double>(abdd::testing::brute_force_radius(
          [&](const BitVector& y) { return eval_ltf(ltf, y) > 0; }, x));
    brute /= static_cast<double>(std::size_t{1} << n);
    EXPECT_DOUBLE_EQ(model_robustness(f, n), brute);
    EXPECT_DOUBLE_EQ(sample_robustness(f, cube(n)).value, brute);
  }
}

TEST(Report, Json) {
  const auto rep = sample_robustness(projection_circuit(2, 1), {BitVector({1, -1})});
  const auto j = to_json(rep);
  EXPECT_NE(j.find("\"value\""), std::string::npos);
  EXPECT_NE(j.find("\"+-\""), std::string::npos);
}

TEST(Indeterminate, CarriesRadius) {
  const Indeterminate e("timed out", 3);
  EXPECT_EQ(e.radius(), 3);
}
