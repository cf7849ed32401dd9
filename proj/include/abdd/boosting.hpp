#pragma once

#include <cstddef>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "abdd/data.hpp"
#include "abdd/diagram.hpp"

namespace abdd {

/// Interval partition 0 = v_0 < v_1 < ... < v_w = 1 of [0,1] such that on
/// every interval I, max_{I} G <= max(delta, (1+lambda) G(q)) for all q in I.
/// A value on a breakpoint belongs to the interval it closes.
class Net {
 public:
  Net(std::vector<double> breakpoints, double delta, double lambda);

  const std::vector<double>& breakpoints() const noexcept { return bp_; }
  std::size_t length() const noexcept { return bp_.size() - 1; }
  double delta() const noexcept { return delta_; }
  double lambda() const noexcept { return lambda_; }

  /// Index k of the interval (v_k, v_{k+1}] holding q; q = 0 maps to 0.
  std::size_t interval_of(double q) const;

 private:
  std::vector<double> bp_;
  double delta_;
  double lambda_;
};

/// Geometric construction: G-levels delta(1+lambda)^j below 1, both
/// preimages of each level, plus {0, 1/2, 1}.
Net build_net(double delta, double lambda);

/// max of G over [a,b].
double max_pseudo_entropy(double a, double b);

struct IterationRecord;

struct BoostConfig {
  double epsilon = 0.01;
  std::size_t max_iterations = 1000;
  std::vector<Hypothesis> hypotheses;
  /// Called after every iteration with T_{k+1} (frontier still open).
  std::function<void(const Diagram&, const IterationRecord&)> observer;
};

/// 10 * ceil(4 ln(1/eps) / rho^2) when the margin is known, else 1000.
std::size_t default_max_iterations(double epsilon, std::optional<double> margin);

struct IterationRecord {
  std::size_t iter = 0;
  std::string hypothesis;      // label chosen for the new layer ("per-node" for MM)
  double edge = 0.0;           // achieved edge under the p'-mixture
  double jensen = 0.0;         // sum_u p'_u edge(d^u, h)^2
  double lambda_hat = 0.0;
  double delta_hat = 0.0;
  double h_before = 0.0;       // H_U(f|T_k)
  double h_split = 0.0;        // H_U(f|h_k,T_k)
  double h_merged = 0.0;       // H_U(f|T_{k+1})
  double error_before = 0.0;   // training error of T_k with majority routing
  std::size_t width = 0;       // frontier width after merge
  std::size_t net_length = 0;  // 0 when no net was needed
  std::size_t absorbed = 0;    // split children routed straight to a leaf
};

using IterationTrace = std::vector<IterationRecord>;

enum class BoostStatus { Converged, Diverged };

struct BoostResult {
  Diagram diagram;
  IterationTrace trace;
  BoostStatus status = BoostStatus::Converged;
  double final_entropy = 0.0;
};

struct SplitChoice {
  Hypothesis hypothesis;
  Distribution mixture;  // d-hat
  double edge = 0.0;
  double jensen = 0.0;
};

/// Picks the hypothesis maximizing the edge under the p'-weighted mixture of
/// the frontier nodes' balanced distributions. Lowest index wins ties.
SplitChoice split_select(const Diagram& t, std::span<const Hypothesis> hypotheses,
                         const LabeledSample& s);

/// Splits every frontier node of `t` on `h`, creating open children one layer
/// down. Returns T'.
Diagram split_frontier(const Diagram& t, const Hypothesis& h, const LabeledSample& s);

/// Routes pure frontier nodes of the post-split diagram to their leaf, then
/// merges the remaining frontier nodes falling in the same net interval.
Diagram merge_frontier(const Diagram& split, const LabeledSample& s, const Net& net);

BoostResult boost(const LabeledSample& s, const BoostConfig& cfg);

/// Per-node variant: each frontier node is split on its own best hypothesis
/// under its own balanced distribution. Produces a BDD.
BoostResult boost_mm_baseline(const LabeledSample& s, const BoostConfig& cfg);

void write_trace_csv(std::ostream& out, const IterationTrace& trace);

}  // namespace abdd
