// Seeded generators and brute-force oracles shared by the test binaries.
#pragma once

#include <algorithm>
#include <cstdint>
#include <limits>
#include <random>
#include <vector>

#include "abdd/bnn.hpp"
#include "abdd/circuit.hpp"
#include "abdd/data.hpp"
#include "abdd/ltf.hpp"

namespace abdd::testing {

using Rng = std::mt19937_64;

inline BitVector random_point(Rng& rng, std::size_t n) {
  std::uniform_int_distribution<std::uint64_t> pick(0, (std::uint64_t{1} << n) - 1);
  return BitVector::from_index(pick(rng), n);
}

inline bool is_constant(const ThresholdFunction& f) {
  const auto n = f.dimension();
  const int first = eval_ltf(f, BitVector::from_index(0, n));
  for (std::uint64_t i = 1; i < (std::uint64_t{1} << n); ++i)
    if (eval_ltf(f, BitVector::from_index(i, n)) != first) return false;
  return true;
}

/// Integer weights in [-range, range], integer bias; never constant.
inline ThresholdFunction random_ltf(Rng& rng, std::size_t n, int range = 5) {
  std::uniform_int_distribution<int> w(-range, range);
  std::uniform_int_distribution<int> b(-range, range);
  while (true) {
    ThresholdFunction f;
    for (std::size_t i = 0; i < n; ++i) f.weights.push_back(w(rng));
    f.bias = b(rng);
    if (!is_constant(f)) return f;
  }
}

/// Random circuit over x0..x{n-1} built with a raw builder.
inline Circuit random_circuit(Rng& rng, std::size_t n, std::size_t gates, bool simplify = false) {
  CircuitBuilder b(simplify);
  std::vector<GateId> pool;
  for (std::size_t i = 0; i < n; ++i) pool.push_back(b.var(input_name(i)));
  std::uniform_int_distribution<int> op(0, 2);
  for (std::size_t g = 0; g < gates; ++g) {
    std::uniform_int_distribution<std::size_t> pick(0, pool.size() - 1);
    const auto a = pool[pick(rng)];
    const auto c = pool[pick(rng)];
    switch (op(rng)) {
      case 0: pool.push_back(b.lnot(a)); break;
      case 1: pool.push_back(b.land(a, c)); break;
      default: pool.push_back(b.lor(a, c)); break;
    }
  }
  return b.build(pool.back());
}

/// min over x' with f(x') != f(x) of the Hamming distance, by enumeration.
template <typename F>
std::size_t brute_force_radius(F&& f, const BitVector& x) {
  const auto n = x.size();
  const bool fx = f(x);
  std::size_t best = std::numeric_limits<std::size_t>::max();
  for (std::uint64_t i = 0; i < (std::uint64_t{1} << n); ++i) {
    const auto y = BitVector::from_index(i, n);
    if (f(y) != fx) best = std::min(best, hamming_distance(x, y));
  }
  return best;
}

/// Two-layer dense network over an h x w image with `hidden` neurons.
inline NetworkSpec random_two_layer(Rng& rng, std::size_t h, std::size_t w, std::size_t hidden) {
  std::uniform_int_distribution<int> wt(-3, 3);
  while (true) {
    DenseLayer l1, l2;
    for (std::size_t j = 0; j < hidden; ++j) {
      std::vector<double> row;
      for (std::size_t i = 0; i < h * w; ++i) row.push_back(wt(rng));
      l1.weights.push_back(row);
      l1.bias.push_back(wt(rng));
    }
    std::vector<double> out;
    for (std::size_t j = 0; j < hidden; ++j) out.push_back(wt(rng));
    l2.weights.push_back(out);
    l2.bias.push_back(wt(rng));
    NetworkSpec spec(h, w, {l1, l2});
    const auto n = spec.input_size();
    const int first = forward(spec, BitVector::from_index(0, n));
    for (std::uint64_t i = 1; i < (std::uint64_t{1} << n); ++i)
      if (forward(spec, BitVector::from_index(i, n)) != first) return spec;
  }
}

}  // namespace abdd::testing
