#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "abdd/boosting.hpp"
#include "abdd/error.hpp"
#include "abdd/ltf.hpp"
#include "support.hpp"

using namespace abdd;
using abdd::testing::Rng;

namespace {

double g(double q) { return 2.0 * std::sqrt(q * (1.0 - q)); }

// Max of G on [a,b] from concavity and symmetry about 1/2.
double max_g(double a, double b) {
  if (a <= 0.5 && 0.5 <= b) return 1.0;
  return std::max(g(a), g(b));
}

// Samples `per` points per interval and checks the net property.
::testing::AssertionResult net_valid(const Net& net, double delta, double lambda, int per) {
  const auto& bp = net.breakpoints();
  if (bp.front() != 0.0 || bp.back() != 1.0) return ::testing::AssertionFailure() << "endpoints";
  for (std::size_t k = 1; k < bp.size(); ++k) {
    if (!(bp[k - 1] < bp[k])) return ::testing::AssertionFailure() << "not increasing at " << k;
    const double a = bp[k - 1], b = bp[k], top = max_g(a, b);
    for (int i = 0; i <= per; ++i) {
      const double q = a + (b - a) * i / per;
      if (top > std::max(delta, (1 + lambda) * g(q)) + 1e-12)
        return ::testing::AssertionFailure() << "interval [" << a << "," << b << "] fails at q=" << q;
    }
  }
  return ::testing::AssertionSuccess();
}

template <typename F>
LabeledSample exhaustive(std::size_t n, F&& f) {
  std::vector<Example> items;
  for (std::uint64_t i = 0; i < (std::uint64_t{1} << n); ++i) {
    auto x = BitVector::from_index(i, n);
    items.push_back({x, f(x)});
  }
  return LabeledSample(n, std::move(items));
}

std::vector<Hypothesis> projections(std::size_t n) {
  std::vector<Hypothesis> h;
  for (std::size_t i = 0; i < n; ++i) h.push_back(Hypothesis::projection(i));
  return h;
}

std::size_t net_length_bound(double delta, double lambda) {
  return 2 * static_cast<std::size_t>(std::ceil(std::log(1 / delta) / std::log(1 + lambda))) + 3;
}

}  // namespace

TEST(Net, SingleIntervalWhenDeltaIsOne) {
  const auto net = build_net(1.0, 0.3);
  EXPECT_EQ(net.length(), 1u);
  EXPECT_TRUE(net_valid(net, 1.0, 0.3, 10000));
}

TEST(Net, DenseSamplingExample) {
  const auto net = build_net(0.1, 0.5);
  EXPECT_TRUE(net_valid(net, 0.1, 0.5, 10000));
  EXPECT_LE(net.length(), net_length_bound(0.1, 0.5));
}

TEST(Net, BreakpointsNearOneStayValid) {
  // Fine nets put thousands of breakpoints within 1e-5 of q = 1, where a
  // rounded preimage used to overshoot its level by ~1e-11.
  const double d = 0.00013563157773044203, l = 0.00096375834487745613;
  const auto net = build_net(d, l);
  EXPECT_TRUE(net_valid(net, d, l, 2));
  EXPECT_LE(net.length(), net_length_bound(d, l));
}

TEST(Net, RandomParameters) {
  Rng rng(101);
  std::uniform_real_distribution<double> u(1e-4, 0.999);
  for (int trial = 0; trial < 300; ++trial) {
    const double d = u(rng), l = u(rng);
    const auto net = build_net(d, l);
    ASSERT_TRUE(net_valid(net, d, l, 500)) << d << " " << l;
    ASSERT_LE(net.length(), net_length_bound(d, l));
  }
}

TEST(Net, IntervalLookupBoundaries) {
  const auto net = build_net(0.1, 0.5);
  const auto& bp = net.breakpoints();
  EXPECT_EQ(net.interval_of(0.0), 0u);
  EXPECT_EQ(net.interval_of(1.0), net.length() - 1);
  for (std::size_t k = 1; k + 1 < bp.size(); ++k) {
    EXPECT_EQ(net.interval_of(bp[k]), k - 1);  // breakpoint closes the lower interval
    EXPECT_EQ(net.interval_of(std::nextafter(bp[k], 1.0)), k);
  }
  EXPECT_THROW(build_net(0.0, 0.5), DomainError);
  EXPECT_THROW(build_net(0.5, 0.0), DomainError);
}

TEST(Net, MaxPseudoEntropy) {
  EXPECT_DOUBLE_EQ(max_pseudo_entropy(0.1, 0.9), 1.0);
  EXPECT_DOUBLE_EQ(max_pseudo_entropy(0.6, 0.9), g(0.6));
  EXPECT_DOUBLE_EQ(max_pseudo_entropy(0.0, 0.2), g(0.2));
}

TEST(SplitSelect, PerfectHypothesis) {
  const auto s = exhaustive(2, [](const BitVector& x) { return x[0]; });
  Diagram t = Diagram::open_root(2);
  const auto hyps = lifted_hypotheses(2);
  const auto c = split_select(t, hyps, s);
  EXPECT_EQ(c.hypothesis, Hypothesis::projection(0));
  EXPECT_DOUBLE_EQ(c.edge, 1.0);
}

TEST(SplitSelect, XorHasNoEdge) {
  const auto s = exhaustive(2, [](const BitVector& x) { return x[0] * x[1]; });
  Diagram t = Diagram::open_root(2);
  const auto hyps = lifted_hypotheses(2);
  EXPECT_THROW(split_select(t, hyps, s), WeakLearnerFailure);
  BoostConfig cfg;
  cfg.hypotheses = hyps;
  EXPECT_THROW(boost(s, cfg), WeakLearnerFailure);
}

TEST(SplitSelect, AndLikeEdgeAtLeastMargin) {
  const ThresholdFunction f{{1, 1}, -1};
  const auto s = full_sample(f);
  const auto hyps = lifted_hypotheses(2);
  const auto c = split_select(Diagram::open_root(2), hyps, s);
  EXPECT_GE(c.edge, 0.5 - 1e-9);
}

TEST(SplitSelect, LowestIndexWinsTies) {
  // MAJ3: all three projections tie.
  const auto s = exhaustive(3, [](const BitVector& x) { return x[0] + x[1] + x[2] > 0 ? 1 : -1; });
  const auto hyps = lifted_hypotheses(3);
  const auto c = split_select(Diagram::open_root(3), hyps, s);
  EXPECT_EQ(c.hypothesis, Hypothesis::projection(0));
}

TEST(Merge, PureChildrenAbsorbed) {
  const auto s = exhaustive(2, [](const BitVector& x) { return x[0]; });
  const auto split = split_frontier(Diagram::open_root(2), Hypothesis::projection(0), s);
  const auto merged = merge_frontier(split, s, build_net(0.1, 0.1));
  EXPECT_TRUE(frontier(merged).empty());
  EXPECT_DOUBLE_EQ(training_error(merged, s), 0.0);
}

TEST(Merge, SingleIntervalCollapsesFrontier) {
  // q = 1/3 and 2/3 children, net of one interval.
  const auto s = exhaustive(3, [](const BitVector& x) { return x[0] + x[1] + x[2] > 0 ? 1 : -1; });
  Diagram t = Diagram::open_root(3);
  t = split_frontier(t, Hypothesis::projection(0), s);
  EXPECT_EQ(frontier(t).size(), 2u);
  const auto merged = merge_frontier(t, s, build_net(1.0, 0.5));
  EXPECT_EQ(frontier(merged).size(), 1u);
  EXPECT_TRUE(validate(merged, DiagramKind::ABDD));
}

TEST(Boost, ProjectionInOneIteration) {
  const auto s = exhaustive(2, [](const BitVector& x) { return x[0]; });
  BoostConfig cfg;
  cfg.epsilon = 0.1;
  cfg.hypotheses = lifted_hypotheses(2);
  const auto r = boost(s, cfg);
  EXPECT_EQ(r.status, BoostStatus::Converged);
  EXPECT_EQ(r.trace.size(), 1u);
  EXPECT_EQ(size(r.diagram), 1u);
  EXPECT_DOUBLE_EQ(training_error(r.diagram, s), 0.0);

  const auto mm = boost_mm_baseline(s, cfg);
  EXPECT_EQ(mm.diagram.kind(), DiagramKind::BDD);
  EXPECT_EQ(size(mm.diagram), 1u);
  EXPECT_DOUBLE_EQ(training_error(mm.diagram, s), 0.0);
}

TEST(Boost, Majority3Exact) {
  const auto s = exhaustive(3, [](const BitVector& x) { return x[0] + x[1] + x[2] > 0 ? 1 : -1; });
  BoostConfig cfg;
  cfg.epsilon = 1.0 / 8;
  cfg.hypotheses = lifted_hypotheses(3);
  const auto r = boost(s, cfg);
  EXPECT_EQ(r.status, BoostStatus::Converged);
  for (const auto& e : s.items()) EXPECT_EQ(evaluate(r.diagram, e.x), e.y);
  EXPECT_TRUE(validate(r.diagram, DiagramKind::ABDD));
}

TEST(Boost, PureSampleGivesConstant) {
  const auto s = exhaustive(2, [](const BitVector&) { return -1; });
  BoostConfig cfg;
  cfg.hypotheses = lifted_hypotheses(2);
  const auto r = boost(s, cfg);
  EXPECT_TRUE(r.trace.empty());
  EXPECT_EQ(r.diagram.root(), kFalseLeaf);
}

TEST(Boost, ConfigValidation) {
  const auto s = exhaustive(2, [](const BitVector& x) { return x[0]; });
  BoostConfig cfg;
  cfg.hypotheses = lifted_hypotheses(2);
  cfg.epsilon = 0.0;
  EXPECT_THROW(boost(s, cfg), DomainError);
  cfg.epsilon = 1.0;
  EXPECT_THROW(boost(s, cfg), DomainError);
  cfg.epsilon = 0.1;
  cfg.hypotheses.clear();
  EXPECT_THROW(boost(s, cfg), DomainError);
  cfg.hypotheses = {Hypothesis::projection(7)};
  EXPECT_THROW(boost(s, cfg), DomainError);
}

TEST(Boost, DivergesUnderIterationCap) {
  Rng rng(77);
  const auto s = full_sample(abdd::testing::random_ltf(rng, 8));
  BoostConfig cfg;
  cfg.epsilon = 1.0 / 256;
  cfg.hypotheses = lifted_hypotheses(8);
  cfg.max_iterations = 1;
  const auto r = boost(s, cfg);
  if (r.trace.size() == 1 && r.final_entropy >= cfg.epsilon) EXPECT_EQ(r.status, BoostStatus::Diverged);
}

TEST(MmBaseline, XorIsExact) {
  const auto s = exhaustive(2, [](const BitVector& x) { return x[0] * x[1]; });
  BoostConfig cfg;
  cfg.epsilon = 0.25;
  cfg.hypotheses = lifted_hypotheses(2);
  const auto r = boost_mm_baseline(s, cfg);
  EXPECT_EQ(r.status, BoostStatus::Converged);
  for (const auto& e : s.items()) EXPECT_EQ(evaluate(r.diagram, e.x), e.y);
  EXPECT_TRUE(validate(r.diagram, DiagramKind::BDD));
}

TEST(MmBaseline, RandomLtfsReachZeroError) {
  Rng rng(41);
  for (int trial = 0; trial < 10; ++trial) {
    const auto s = full_sample(abdd::testing::random_ltf(rng, 10));
    BoostConfig cfg;
    cfg.epsilon = 1.0 / 1024;
    cfg.hypotheses = lifted_hypotheses(10);
    const auto a = boost(s, cfg);
    const auto m = boost_mm_baseline(s, cfg);
    EXPECT_DOUBLE_EQ(training_error(a.diagram, s), 0.0);
    EXPECT_DOUBLE_EQ(training_error(m.diagram, s), 0.0);
    EXPECT_TRUE(validate(m.diagram, DiagramKind::BDD));
  }
}

// Every per-iteration guarantee, checked on random LTFs over the full cube.
TEST(BoostProperties, PerIterationBounds) {
  Rng rng(2024);
  for (int trial = 0; trial < 40; ++trial) {
    const std::size_t n = 3 + trial % 6;
    const auto f = abdd::testing::random_ltf(rng, n);
    const auto s = full_sample(f);
    const double rho = margin(f).rho;
    BoostConfig cfg;
    cfg.epsilon = std::ldexp(1.0, -static_cast<int>(n));
    cfg.hypotheses = lifted_hypotheses(n);
    double gmin = 1.0;
    cfg.observer = [&](const Diagram& t, const IterationRecord& r) {
      const double gm = r.edge;
      gmin = std::min(gmin, gm);
      EXPECT_LE(r.error_before, r.h_before + 1e-12);
      EXPECT_LE(r.h_split, (1 - gm * gm / 2) * r.h_before + 1e-9);
      EXPECT_GE(r.jensen, gm * gm - 1e-9);
      EXPECT_GE(r.lambda_hat, gm * gm / 2 - 1e-9);
      EXPECT_LE(r.h_merged, (1 - r.lambda_hat / 2) * r.h_before + 1e-9);
      EXPECT_LE(r.h_merged, (1 - gm * gm / 4) * r.h_before + 1e-9);
      EXPECT_GE(gm, rho - 1e-9);
      EXPECT_NEAR(r.h_merged, frontier_entropy(t, s), 1e-12);
      EXPECT_TRUE(validate(t, DiagramKind::ABDD));
      if (r.net_length > 0) {
        const auto net = build_net(r.delta_hat, r.lambda_hat / 3);
        EXPECT_EQ(net.length(), r.net_length);
        EXPECT_TRUE(net_valid(net, r.delta_hat, r.lambda_hat / 3, 200));
        EXPECT_LE(r.width, r.net_length);
      }
    };
    const auto res = boost(s, cfg);
    ASSERT_EQ(res.status, BoostStatus::Converged);
    EXPECT_LT(res.final_entropy, cfg.epsilon);
    EXPECT_DOUBLE_EQ(training_error(res.diagram, s), 0.0);
    EXPECT_LE(res.trace.size(), static_cast<std::size_t>(std::ceil(4 * std::log(1 / cfg.epsilon) / (gmin * gmin))));
  }
}

TEST(BoostProperties, Deterministic) {
  Rng rng(8);
  const auto s = full_sample(abdd::testing::random_ltf(rng, 7));
  BoostConfig cfg;
  cfg.epsilon = 1.0 / 128;
  cfg.hypotheses = lifted_hypotheses(7);
  std::ostringstream a, b;
  write_trace_csv(a, boost(s, cfg).trace);
  write_trace_csv(b, boost(s, cfg).trace);
  EXPECT_EQ(a.str(), b.str());
  EXPECT_EQ(to_json(boost(s, cfg).diagram), to_json(boost(s, cfg).diagram));
}

TEST(Trace, CsvHeader) {
  std::ostringstream out;
  write_trace_csv(out, {});
  EXPECT_EQ(out.str(), "iter,hypothesis,edge,lambda_hat,delta_hat,H_before,H_split,H_merged,width\n");
}

TEST(DefaultIterations, Formula) {
  EXPECT_EQ(default_max_iterations(0.01, std::nullopt), 1000u);
  EXPECT_EQ(default_max_iterations(0.01, 0.5), 740u);
}
