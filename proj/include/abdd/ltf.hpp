#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "abdd/data.hpp"

namespace abdd {

inline constexpr std::size_t kDefaultDimensionCap = 16;
inline constexpr std::size_t kHardDimensionCap = 24;

/// Reads ABDD_CAP from the environment, clamped to the hard cap.
std::size_t dimension_cap_from_env(std::size_t fallback = kDefaultDimensionCap);

/// f(x) = +1 iff w.x + b >= 0.
struct ThresholdFunction {
  std::vector<double> weights;
  double bias = 0.0;

  std::size_t dimension() const noexcept { return weights.size(); }
};

void check_finite(const ThresholdFunction& f);

int eval_ltf(const ThresholdFunction& f, const BitVector& x);

/// All 2^n instances in lexicographic order (-1 before +1, coordinate 0 most
/// significant), labeled by f.
LabeledSample full_sample(const ThresholdFunction& f, std::size_t cap = kDefaultDimensionCap);

/// x_0..x_{n-1} followed by -x_0..-x_{n-1}.
std::vector<Hypothesis> lifted_hypotheses(std::size_t n);

/// Optimal L1 margin of f over the cube with its LP dual certificate.
struct MarginCertificate {
  double rho = 0.0;                    // min_x f(x)(sum w+_i h_i(x) + b), primal side
  double dual_value = 0.0;             // max_i sum_x d_x f(x) h_i(x), dual side
  double gap = 0.0;                    // dual_value - rho
  std::vector<double> lifted_weights;  // length 2n, nonnegative, sums to 1
  double bias = 0.0;
  std::vector<double> dual;  // d* over the cube (index order of BitVector::from_index)
  std::size_t dual_support = 0;
  std::size_t pivots = 0;
};

MarginCertificate margin(const ThresholdFunction& f, std::size_t cap = kDefaultDimensionCap);

/// (w,b) folded back from a lifted certificate: w_i = w+_i - w+_{n+i}.
ThresholdFunction folded(const MarginCertificate& cert);

struct IntegerWeights {
  std::vector<std::int64_t> weights;
  std::int64_t bias = 0;
  double alpha = 0.0;
};

/// alpha = max(|w_i|, |b|); w^_i = floor((10^p / alpha) w_i), same for b.
/// Floors the binary doubles as given.
IntegerWeights integer_scale(const std::vector<double>& w, double b, int digits);

/// Same map with exact rational arithmetic on decimal strings ("-0.125",
/// "3", "1e-2").
IntegerWeights integer_scale_exact(const std::vector<std::string>& w, const std::string& b,
                                   int digits);

ThresholdFunction read_ltf_file(const std::string& path);
ThresholdFunction ltf_from_json(const std::string& text);
std::string to_json(const ThresholdFunction& f);
std::string margin_report_json(const MarginCertificate& cert);

}  // namespace abdd
