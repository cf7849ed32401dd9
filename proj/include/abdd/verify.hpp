#pragma once

#include <chrono>
#include <cstddef>
#include <string>
#include <vector>

#include "abdd/circuit.hpp"
#include "abdd/data.hpp"

namespace abdd {

struct RobustnessOptions {
  std::chrono::duration<double> timeout = std::chrono::seconds(60);  // per SAT query
  /// After the first satisfiable radius k < n, also query k+1 and require SAT
  /// (Hamming balls nest).
  bool check_monotone = true;
  unsigned jobs = 1;
};

struct InstanceRobustness {
  BitVector x;
  int label = 0;        // f(x) as +-1
  std::size_t radius = 0;
  double seconds = 0.0;
  std::size_t queries = 0;
};

struct RobustnessReport {
  std::vector<InstanceRobustness> instances;
  double value = 0.0;  // mean radius
};

/// Smallest k such that some x' with dis(x, x') <= k has f(x') != f(x),
/// found by SAT queries on hamming_circuit(x,k) AND (f or NOT f).
/// Throws TrivialFunction if no flip exists within radius n, Indeterminate on
/// timeout.
InstanceRobustness instance_robustness(const Circuit& f, const BitVector& x,
                                       const RobustnessOptions& opts = {});

/// Mean of instance_robustness over `sample`, in input order.
RobustnessReport sample_robustness(const Circuit& f, const std::vector<BitVector>& sample,
                                   const RobustnessOptions& opts = {});

/// Mean robustness over the whole cube, by truth-table enumeration and a
/// breadth-first sweep of the hypercube (no SAT). n must not exceed `cap`.
double model_robustness(const Circuit& f, std::size_t n, std::size_t cap = 16);

std::string to_json(const RobustnessReport& r);

}  // namespace abdd
