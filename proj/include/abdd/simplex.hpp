#pragma once

#include <cstddef>
#include <vector>

namespace abdd::lp {

/// Dense row-major matrix.
struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0.0) {}
  double& operator()(std::size_t r, std::size_t c) { return data[r * cols + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data[r * cols + c]; }
};

enum class Status { Optimal, Infeasible, Unbounded, IterationLimit };

struct Solution {
  Status status = Status::Infeasible;
  std::vector<double> x;      // primal point
  std::vector<double> duals;  // y with A^T y <= c at optimality
  double objective = 0.0;
  std::size_t pivots = 0;
};

struct Options {
  double tolerance = 1e-9;
  std::size_t max_pivots = 1'000'000;
};

/// min c^T x  s.t.  A x = b, x >= 0.
/// Two-phase dense tableau simplex with Bland's rule.
Solution solve_standard_form(const Matrix& a, const std::vector<double>& b,
                             const std::vector<double>& c, const Options& opts = {});

}  // namespace abdd::lp
