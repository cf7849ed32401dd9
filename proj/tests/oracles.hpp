// Exhaustive oracles shared by the unit tests and the acceptance binary.
#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <functional>
#include <limits>
#include <vector>

#include "abdd/circuit.hpp"
#include "abdd/data.hpp"
#include "abdd/ltf.hpp"
#include "abdd/sat.hpp"
#include "support.hpp"

namespace abdd::testing {

// Vertex enumeration of the primal margin LP over z = (w+ in R^{2n}, b, rho):
//   max rho  s.t.  f(x)(sum_i w+_i h_i(x) + b) - rho >= 0,  w+ >= 0,  sum w+ = 1.
// Every vertex makes dim-1 inequalities tight together with the equality.
inline double margin_by_vertices(const ThresholdFunction& f) {
  const std::size_t n = f.dimension(), cube = std::size_t{1} << n, dim = 2 * n + 2;
  std::vector<Eigen::VectorXd> rows;  // row . z >= 0
  for (std::size_t k = 0; k < cube; ++k) {
    const auto x = BitVector::from_index(k, n);
    const double y = eval_ltf(f, x);
    Eigen::VectorXd r = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(dim));
    for (std::size_t i = 0; i < n; ++i) {
      r[static_cast<Eigen::Index>(i)] = y * x[i];
      r[static_cast<Eigen::Index>(n + i)] = -y * x[i];
    }
    r[static_cast<Eigen::Index>(2 * n)] = y;
    r[static_cast<Eigen::Index>(2 * n + 1)] = -1.0;
    rows.push_back(r);
  }
  for (std::size_t i = 0; i < 2 * n; ++i) {
    Eigen::VectorXd r = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(dim));
    r[static_cast<Eigen::Index>(i)] = 1.0;
    rows.push_back(r);
  }
  double best = -std::numeric_limits<double>::infinity();
  std::vector<std::size_t> pick;
  std::function<void(std::size_t)> choose = [&](std::size_t start) {
    if (pick.size() == dim - 1) {
      Eigen::MatrixXd a(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
      Eigen::VectorXd rhs = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(dim));
      for (std::size_t r = 0; r < pick.size(); ++r) a.row(static_cast<Eigen::Index>(r)) = rows[pick[r]];
      a.row(static_cast<Eigen::Index>(dim - 1)).setZero();
      for (std::size_t i = 0; i < 2 * n; ++i) a(static_cast<Eigen::Index>(dim - 1), static_cast<Eigen::Index>(i)) = 1.0;
      rhs[static_cast<Eigen::Index>(dim - 1)] = 1.0;
      Eigen::FullPivLU<Eigen::MatrixXd> lu(a);
      if (!lu.isInvertible()) return;
      const Eigen::VectorXd z = lu.solve(rhs);
      for (const auto& r : rows)
        if (r.dot(z) < -1e-9) return;
      best = std::max(best, z[static_cast<Eigen::Index>(dim - 1)]);
      return;
    }
    for (std::size_t i = start; i < rows.size(); ++i) {
      pick.push_back(i);
      choose(i + 1);
      pick.pop_back();
    }
  };
  choose(0);
  return best;
}

// Exhaustive satisfiability over up to 32 variables with bit-mask clauses.
inline bool enumerate_sat(const Cnf& f) {
  std::vector<std::pair<std::uint32_t, std::uint32_t>> masks;  // (positive, negative)
  for (const auto& c : f.clauses) {
    std::uint32_t p = 0, q = 0;
    for (int lit : c) (lit > 0 ? p : q) |= 1u << (std::abs(lit) - 1);
    masks.emplace_back(p, q);
  }
  for (std::uint64_t a = 0; a < (std::uint64_t{1} << f.num_vars); ++a) {
    const auto v = static_cast<std::uint32_t>(a);
    bool ok = true;
    for (auto [p, q] : masks)
      if (!((v & p) || (~v & q))) {
        ok = false;
        break;
      }
    if (ok) return true;
  }
  return false;
}

inline Cnf random_3cnf(Rng& rng, int vars, int clauses) {
  Cnf f;
  f.num_vars = vars;
  std::uniform_int_distribution<int> var(1, vars);
  std::bernoulli_distribution sign(0.5);
  for (int c = 0; c < clauses; ++c) {
    std::vector<int> cl;
    while (cl.size() < 3) {
      const int v = var(rng);
      if (std::find(cl.begin(), cl.end(), v) != cl.end() || std::find(cl.begin(), cl.end(), -v) != cl.end())
        continue;
      cl.push_back(sign(rng) ? v : -v);
    }
    f.clauses.push_back(cl);
  }
  return f;
}

// Pigeons into holes, one fewer hole than pigeons.
inline Cnf pigeonhole(int holes) {
  Cnf f;
  const int pigeons = holes + 1;
  auto v = [&](int p, int h) { return p * holes + h + 1; };
  f.num_vars = pigeons * holes;
  for (int p = 0; p < pigeons; ++p) {
    std::vector<int> c;
    for (int h = 0; h < holes; ++h) c.push_back(v(p, h));
    f.clauses.push_back(c);
  }
  for (int h = 0; h < holes; ++h)
    for (int p = 0; p < pigeons; ++p)
      for (int q = p + 1; q < pigeons; ++q) f.clauses.push_back({-v(p, h), -v(q, h)});
  return f;
}

inline bool circuit_sat_by_enumeration(const Circuit& c) {
  const auto n = c.inputs.size();
  for (std::uint64_t a = 0; a < (std::uint64_t{1} << n); ++a) {
    std::vector<bool> v(n);
    for (std::size_t i = 0; i < n; ++i) v[i] = (a >> i) & 1;
    if (eval_circuit(c, v)) return true;
  }
  return false;
}

}  // namespace abdd::testing
