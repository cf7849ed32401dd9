#include "abdd/sat.hpp"

#include <algorithm>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

#include "abdd/error.hpp"

namespace abdd {

TseitinResult tseitin(const Circuit& c) {
  check_circuit(c);
  TseitinResult r;
  auto& cl = r.cnf.clauses;
  const int gates = static_cast<int>(c.gates.size());
  auto v = [](std::size_t g) { return static_cast<int>(g) + 1; };
  r.input_vars.assign(c.inputs.size(), 0);
  for (std::size_t id = 0; id < c.gates.size(); ++id) {
    const auto& g = c.gates[id];
    const int out = v(id);
    switch (g.op) {
      case GateOp::Const: cl.push_back({g.value ? out : -out}); break;
      case GateOp::Var:
        if (r.input_vars[g.var] != 0) {  // duplicate variable gate: tie them
          cl.push_back({-out, r.input_vars[g.var]});
          cl.push_back({out, -r.input_vars[g.var]});
        } else {
          r.input_vars[g.var] = out;
        }
        break;
      case GateOp::Not:
        cl.push_back({out, v(g.in[0])});
        cl.push_back({-out, -v(g.in[0])});
        break;
      case GateOp::And: {
        std::vector<int> big{out};
        for (auto f : g.in) {
          cl.push_back({-out, v(f)});
          big.push_back(-v(f));
        }
        cl.push_back(std::move(big));
        break;
      }
      case GateOp::Or: {
        std::vector<int> big{-out};
        for (auto f : g.in) {
          cl.push_back({out, -v(f)});
          big.push_back(v(f));
        }
        cl.push_back(std::move(big));
        break;
      }
    }
  }
  int next = gates;
  for (auto& iv : r.input_vars)
    if (iv == 0) iv = ++next;  // unused input: free variable
  r.cnf.num_vars = next;
  cl.push_back({v(c.output)});
  return r;
}

bool satisfies(const Cnf& f, const std::vector<bool>& model) {
  if (model.size() < static_cast<std::size_t>(f.num_vars) + 1) return false;
  for (const auto& clause : f.clauses) {
    bool sat = false;
    for (int lit : clause) {
      const bool val = model[static_cast<std::size_t>(std::abs(lit))];
      if ((lit > 0) == val) {
        sat = true;
        break;
      }
    }
    if (!sat) return false;
  }
  return true;
}

namespace {

class Dpll {
 public:
  Dpll(const Cnf& f, const SolveOptions& opts) : opts_(opts), n_(f.num_vars) {
    value_.assign(static_cast<std::size_t>(n_) + 1, kUnset);
    watches_.resize(2 * (static_cast<std::size_t>(n_) + 1));
    for (const auto& raw : f.clauses) {
      std::vector<int> c = raw;
      for (int lit : c)
        if (lit == 0 || std::abs(lit) > n_) throw InputError("CNF literal out of range");
      std::sort(c.begin(), c.end());
      c.erase(std::unique(c.begin(), c.end()), c.end());
      bool tautology = false;
      for (int lit : c)
        if (std::binary_search(c.begin(), c.end(), -lit)) tautology = true;
      if (tautology) continue;
      if (c.empty()) {
        trivially_unsat_ = true;
        continue;
      }
      if (c.size() == 1) {
        units_.push_back(c[0]);
        continue;
      }
      const auto id = clauses_.size();
      watches_[index(c[0])].push_back(id);
      watches_[index(c[1])].push_back(id);
      clauses_.push_back(std::move(c));
    }
  }

  SatResult run() {
    SatResult res;
    start_ = std::chrono::steady_clock::now();
    if (trivially_unsat_) return res;
    for (int u : units_)
      if (!assign(u)) return res;
    while (true) {
      if (!propagate()) {
        if (!backtrack()) return finish(res, SatStatus::Unsat);
        continue;
      }
      if (timed_out()) return finish(res, SatStatus::Timeout);
      if (opts_.pure_literals && assign_pure_literals()) continue;
      int var = 0;
      for (int v = 1; v <= n_; ++v)
        if (value_[static_cast<std::size_t>(v)] == kUnset) {
          var = v;
          break;
        }
      if (var == 0) {
        res.model.assign(static_cast<std::size_t>(n_) + 1, false);
        for (int v = 1; v <= n_; ++v) res.model[static_cast<std::size_t>(v)] = value_[static_cast<std::size_t>(v)] == kTrue;
        return finish(res, SatStatus::Sat);
      }
      ++decisions_;
      decisions_stack_.push_back({trail_.size(), var, false});
      assign(var);
    }
  }

 private:
  static constexpr std::int8_t kUnset = -1, kFalse = 0, kTrue = 1;

  struct Decision {
    std::size_t trail_pos;
    int var;
    bool flipped;
  };

  static std::size_t index(int lit) {
    return 2 * static_cast<std::size_t>(std::abs(lit)) + (lit < 0 ? 1 : 0);
  }
  std::int8_t lit_value(int lit) const {
    const auto v = value_[static_cast<std::size_t>(std::abs(lit))];
    if (v == kUnset) return kUnset;
    return (lit > 0) == (v == kTrue) ? kTrue : kFalse;
  }

  // Returns false if lit is already false.
  bool assign(int lit) {
    const auto cur = lit_value(lit);
    if (cur == kTrue) return true;
    if (cur == kFalse) return false;
    value_[static_cast<std::size_t>(std::abs(lit))] = lit > 0 ? kTrue : kFalse;
    trail_.push_back(lit);
    return true;
  }

  bool propagate() {
    while (qhead_ < trail_.size()) {
      const int falsified = -trail_[qhead_++];
      auto& ws = watches_[index(falsified)];
      std::size_t keep = 0;
      bool conflict = false;
      for (std::size_t k = 0; k < ws.size(); ++k) {
        const auto cid = ws[k];
        if (conflict) {
          ws[keep++] = cid;
          continue;
        }
        auto& c = clauses_[cid];
        if (c[0] == falsified) std::swap(c[0], c[1]);
        if (lit_value(c[0]) == kTrue) {
          ws[keep++] = cid;
          continue;
        }
        bool moved = false;
        for (std::size_t j = 2; j < c.size(); ++j) {
          if (lit_value(c[j]) != kFalse) {
            std::swap(c[1], c[j]);
            watches_[index(c[1])].push_back(cid);
            moved = true;
            break;
          }
        }
        if (moved) continue;
        ws[keep++] = cid;
        if (lit_value(c[0]) == kFalse) {
          conflict = true;
        } else {
          ++propagations_;
          assign(c[0]);
        }
      }
      ws.resize(keep);
      if (conflict) return false;
    }
    return true;
  }

  void undo_to(std::size_t pos) {
    while (trail_.size() > pos) {
      value_[static_cast<std::size_t>(std::abs(trail_.back()))] = kUnset;
      trail_.pop_back();
    }
    qhead_ = std::min(qhead_, trail_.size());
  }

  bool backtrack() {
    while (!decisions_stack_.empty() && decisions_stack_.back().flipped) {
      undo_to(decisions_stack_.back().trail_pos);
      decisions_stack_.pop_back();
    }
    if (decisions_stack_.empty()) return false;
    auto& d = decisions_stack_.back();
    undo_to(d.trail_pos);
    d.flipped = true;
    assign(-d.var);
    return true;
  }

  bool assign_pure_literals() {
    std::vector<std::uint8_t> polarity(static_cast<std::size_t>(n_) + 1, 0);  // bit0 pos, bit1 neg
    for (const auto& c : clauses_) {
      bool sat = false;
      for (int lit : c)
        if (lit_value(lit) == kTrue) {
          sat = true;
          break;
        }
      if (sat) continue;
      for (int lit : c)
        if (lit_value(lit) == kUnset) polarity[static_cast<std::size_t>(std::abs(lit))] |= lit > 0 ? 1 : 2;
    }
    bool any = false;
    for (int v = 1; v <= n_; ++v) {
      const auto p = polarity[static_cast<std::size_t>(v)];
      if (p == 1 || p == 2) {
        assign(p == 1 ? v : -v);
        any = true;
      }
    }
    return any;
  }

  bool timed_out() {
    if (++ticks_ % 256 != 0) return false;
    return std::chrono::steady_clock::now() - start_ > opts_.timeout;
  }

  SatResult& finish(SatResult& res, SatStatus st) {
    res.status = st;
    res.decisions = decisions_;
    res.propagations = propagations_;
    return res;
  }

  SolveOptions opts_;
  int n_;
  bool trivially_unsat_ = false;
  std::vector<std::vector<int>> clauses_;
  std::vector<int> units_;
  std::vector<std::vector<std::size_t>> watches_;
  std::vector<std::int8_t> value_;
  std::vector<int> trail_;
  std::size_t qhead_ = 0;
  std::vector<Decision> decisions_stack_;
  std::size_t decisions_ = 0, propagations_ = 0, ticks_ = 0;
  std::chrono::steady_clock::time_point start_;
};

}  // namespace

SatResult solve(const Cnf& f, const SolveOptions& opts) {
  if (f.num_vars < 0) throw InputError("CNF with negative variable count");
  SatResult r = Dpll(f, opts).run();
  if (r.status == SatStatus::Sat && !satisfies(f, r.model))
    throw Error("solver produced a model that violates the formula");
  return r;
}

void write_dimacs(std::ostream& out, const Cnf& f) {
  out << "p cnf " << f.num_vars << ' ' << f.clauses.size() << '\n';
  for (const auto& c : f.clauses) {
    for (int lit : c) out << lit << ' ';
    out << "0\n";
  }
}

Cnf read_dimacs(std::istream& in) {
  Cnf f;
  std::string line;
  bool header = false;
  std::size_t declared = 0;
  std::vector<int> cur;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == 'c' || line[0] == '%') continue;
    std::istringstream ls(line);
    if (line[0] == 'p') {
      std::string p, fmt;
      if (!(ls >> p >> fmt >> f.num_vars >> declared) || fmt != "cnf")
        throw InputError("bad DIMACS header: " + line);
      header = true;
      continue;
    }
    if (!header) throw InputError("DIMACS clause before header");
    int lit;
    while (ls >> lit) {
      if (lit == 0) {
        f.clauses.push_back(std::move(cur));
        cur.clear();
      } else {
        if (std::abs(lit) > f.num_vars) throw InputError("DIMACS literal exceeds variable count");
        cur.push_back(lit);
      }
    }
  }
  if (!header) throw InputError("missing DIMACS header");
  if (!cur.empty()) f.clauses.push_back(std::move(cur));
  if (f.clauses.size() != declared) throw InputError("DIMACS clause count does not match header");
  return f;
}

}  // namespace abdd
