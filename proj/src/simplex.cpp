#include "abdd/simplex.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "abdd/error.hpp"

namespace abdd::lp {

namespace {

class Tableau {
 public:
  Tableau(const Matrix& a, const std::vector<double>& b, double tol)
      : m_(a.rows), n_(a.cols), width_(a.cols + a.rows + 1), tol_(tol),
        t_((a.rows + 1) * (a.cols + a.rows + 1), 0.0), basis_(a.rows), sign_(a.rows, 1.0) {
    for (std::size_t i = 0; i < m_; ++i) {
      sign_[i] = b[i] < 0.0 ? -1.0 : 1.0;
      for (std::size_t j = 0; j < n_; ++j) at(i, j) = sign_[i] * a(i, j);
      at(i, n_ + i) = 1.0;
      at(i, rhs()) = sign_[i] * b[i];
      basis_[i] = n_ + i;
    }
  }

  double& at(std::size_t r, std::size_t c) { return t_[r * width_ + c]; }
  double at(std::size_t r, std::size_t c) const { return t_[r * width_ + c]; }
  std::size_t rhs() const { return width_ - 1; }
  std::size_t obj() const { return m_; }

  // Loads the reduced-cost row for costs over the first `ncost` columns.
  void price(const std::vector<double>& cost) {
    for (std::size_t j = 0; j < width_; ++j) at(obj(), j) = j < cost.size() ? cost[j] : 0.0;
    for (std::size_t i = 0; i < m_; ++i) {
      const double cb = basis_[i] < cost.size() ? cost[basis_[i]] : 0.0;
      if (cb == 0.0) continue;
      for (std::size_t j = 0; j < width_; ++j) at(obj(), j) -= cb * at(i, j);
    }
  }

  void pivot(std::size_t r, std::size_t c) {
    const double pv = at(r, c);
    double* row = &t_[r * width_];
    for (std::size_t j = 0; j < width_; ++j) row[j] /= pv;
    row[c] = 1.0;
    for (std::size_t i = 0; i <= m_; ++i) {
      if (i == r) continue;
      double* other = &t_[i * width_];
      const double f = other[c];
      if (f == 0.0) continue;
      for (std::size_t j = 0; j < width_; ++j) other[j] -= f * row[j];
      other[c] = 0.0;
    }
    basis_[r] = c;
  }

  // Bland's rule over columns [0, limit). Returns Optimal or Unbounded.
  Status run(std::size_t limit, std::size_t& pivots, std::size_t max_pivots) {
    while (true) {
      std::size_t enter = limit;
      for (std::size_t j = 0; j < limit; ++j)
        if (at(obj(), j) < -tol_) {
          enter = j;
          break;
        }
      if (enter == limit) return Status::Optimal;
      std::size_t leave = m_;
      double best = std::numeric_limits<double>::infinity();
      for (std::size_t i = 0; i < m_; ++i) {
        const double a = at(i, enter);
        if (a <= tol_) continue;
        const double ratio = at(i, rhs()) / a;
        if (leave == m_ || ratio < best - tol_ ||
            (ratio <= best + tol_ && basis_[i] < basis_[leave])) {
          best = std::min(best, ratio);
          leave = i;
        }
      }
      if (leave == m_) return Status::Unbounded;
      if (++pivots > max_pivots) return Status::IterationLimit;
      pivot(leave, enter);
    }
  }

  // Pivots basic artificials out where a structural column allows it.
  void expel_artificials() {
    for (std::size_t i = 0; i < m_; ++i) {
      if (basis_[i] < n_) continue;
      for (std::size_t j = 0; j < n_; ++j)
        if (std::abs(at(i, j)) > tol_) {
          pivot(i, j);
          break;
        }
    }
  }

  std::size_t m_, n_, width_;
  double tol_;
  std::vector<double> t_;
  std::vector<std::size_t> basis_;
  std::vector<double> sign_;
};

}  // namespace

Solution solve_standard_form(const Matrix& a, const std::vector<double>& b,
                             const std::vector<double>& c, const Options& opts) {
  if (b.size() != a.rows || c.size() != a.cols) throw InputError("simplex: dimension mismatch");
  Tableau tab(a, b, opts.tolerance);
  Solution sol;

  // Phase I: minimize the sum of artificials.
  std::vector<double> phase1(a.cols + a.rows, 0.0);
  for (std::size_t i = 0; i < a.rows; ++i) phase1[a.cols + i] = 1.0;
  tab.price(phase1);
  auto st = tab.run(a.cols + a.rows, sol.pivots, opts.max_pivots);
  if (st == Status::IterationLimit) {
    sol.status = st;
    return sol;
  }
  double scale = 1.0;
  for (double v : b) scale = std::max(scale, std::abs(v));
  if (-tab.at(tab.obj(), tab.rhs()) > 1e3 * opts.tolerance * scale) {
    sol.status = Status::Infeasible;
    return sol;
  }
  tab.expel_artificials();

  // Phase II over structural columns only.
  tab.price(c);
  st = tab.run(a.cols, sol.pivots, opts.max_pivots);
  sol.status = st;
  if (st != Status::Optimal) return sol;

  sol.x.assign(a.cols, 0.0);
  for (std::size_t i = 0; i < a.rows; ++i)
    if (tab.basis_[i] < a.cols) sol.x[tab.basis_[i]] = tab.at(i, tab.rhs());
  sol.objective = 0.0;
  for (std::size_t j = 0; j < a.cols; ++j) sol.objective += c[j] * sol.x[j];
  // y^T = c_B^T B^{-1}; B^{-1} sits in the artificial block.
  sol.duals.assign(a.rows, 0.0);
  for (std::size_t k = 0; k < a.rows; ++k) {
    double y = 0.0;
    for (std::size_t i = 0; i < a.rows; ++i) {
      const auto bi = tab.basis_[i];
      if (bi < a.cols) y += c[bi] * tab.at(i, a.cols + k);
    }
    sol.duals[k] = y * tab.sign_[k];
  }
  return sol;
}

}  // namespace abdd::lp
