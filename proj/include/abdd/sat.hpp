#pragma once

#include <chrono>
#include <cstddef>
#include <iosfwd>
#include <vector>

#include "abdd/circuit.hpp"

namespace abdd {

/// Clause set over variables 1..num_vars; literals are signed DIMACS ints.
struct Cnf {
  int num_vars = 0;
  std::vector<std::vector<int>> clauses;
};

struct TseitinResult {
  Cnf cnf;
  std::vector<int> input_vars;  // CNF variable for each circuit input
};

/// One auxiliary variable per gate plus a unit clause on the output.
TseitinResult tseitin(const Circuit& c);

enum class SatStatus { Sat, Unsat, Timeout };

struct SatResult {
  SatStatus status = SatStatus::Unsat;
  std::vector<bool> model;  // index 1..num_vars; slot 0 unused
  std::size_t decisions = 0;
  std::size_t propagations = 0;
};

struct SolveOptions {
  std::chrono::duration<double> timeout = std::chrono::seconds(60);
  bool pure_literals = true;
};

/// DPLL: two-watched-literal unit propagation, pure-literal elimination,
/// lowest-index true-first branching, chronological backtracking. Returned
/// models are checked against every clause.
SatResult solve(const Cnf& f, const SolveOptions& opts = {});

bool satisfies(const Cnf& f, const std::vector<bool>& model);

void write_dimacs(std::ostream& out, const Cnf& f);
Cnf read_dimacs(std::istream& in);

}  // namespace abdd
