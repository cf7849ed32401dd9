#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <string>
#include <unordered_map>
#include <vector>

#include "abdd/data.hpp"
#include "abdd/diagram.hpp"

namespace abdd {

using GateId = std::uint32_t;

enum class GateOp : std::uint8_t { Const, Var, Not, And, Or };

struct Gate {
  GateOp op = GateOp::Const;
  std::vector<GateId> in;  // fanins, all with smaller ids
  bool value = false;      // Const
  std::uint32_t var = 0;   // Var: index into Circuit::inputs

  friend bool operator==(const Gate&, const Gate&) = default;
};

/// (AND, OR, NOT)-circuit with named inputs, topologically ordered gates and a
/// single output.
struct Circuit {
  std::vector<std::string> inputs;
  std::vector<Gate> gates;
  GateId output = 0;
};

/// Incremental circuit construction. With `simplify` on, constants are
/// propagated (AND with false, OR with true, double negation, x & !x, ...) and
/// structurally identical gates are shared.
class CircuitBuilder {
 public:
  explicit CircuitBuilder(bool simplify = true) : simplify_(simplify) {}

  GateId constant(bool v);
  /// Variable gate for an input name; the input is registered on first use.
  GateId var(const std::string& name);
  void declare_input(const std::string& name);
  GateId lnot(GateId a);
  GateId land(GateId a, GateId b);
  GateId lor(GateId a, GateId b);
  GateId land(std::vector<GateId> in);
  GateId lor(std::vector<GateId> in);

  /// Copies `c` into this builder with its inputs bound by name to `bind`
  /// (unbound inputs become variables). Returns the image of c's output.
  GateId embed(const Circuit& c, const std::unordered_map<std::string, GateId>& bind = {});

  const Gate& gate(GateId id) const { return gates_.at(id); }
  std::size_t gate_slots() const noexcept { return gates_.size(); }

  /// Finalizes: drops gates not reachable from `output` and renumbers.
  Circuit build(GateId output) const;

 private:
  GateId push(Gate g);
  GateId nary(GateOp op, std::vector<GateId> in);
  bool is_const(GateId id, bool v) const {
    return gates_[id].op == GateOp::Const && gates_[id].value == v;
  }

  bool simplify_;
  std::vector<std::string> inputs_;
  std::unordered_map<std::string, std::uint32_t> input_index_;
  std::vector<Gate> gates_;
  std::map<std::pair<GateOp, std::vector<GateId>>, GateId> strash_;
  std::unordered_map<std::uint32_t, GateId> var_gate_;
  GateId const_gate_[2] = {0, 0};
  bool has_const_[2] = {false, false};
};

/// Name of the i-th primary input ("x0", "x1", ...).
std::string input_name(std::size_t i);

struct CompileOptions {
  bool simplify = true;  // false keeps four gates per diagram node
};

/// C(v) = (lit(v) AND C(hi)) OR (NOT lit(v) AND C(lo)); leaves become
/// constants. Inputs are named x0..x{n-1}; all n are declared.
Circuit dd_to_circuit(const Diagram& t, const CompileOptions& opts = {});

bool eval_circuit(const Circuit& c, const std::vector<bool>& assignment);
/// +1 maps to true; inputs named x<i> read coordinate i.
bool eval_circuit(const Circuit& c, const BitVector& x);
/// Assignment by name; missing names are an error.
bool eval_circuit(const Circuit& c, const std::unordered_map<std::string, bool>& assignment);

Circuit negate(const Circuit& c);
/// Inputs are merged by name (c1's order first).
Circuit conjoin(const Circuit& c1, const Circuit& c2);
/// Constant propagation plus structural hashing.
Circuit simplify(const Circuit& c);

/// Number of AND/OR/NOT gates.
std::size_t gate_count(const Circuit& c);

/// Checks acyclicity/topological order, arities and input references.
void check_circuit(const Circuit& c);

/// Circuit true exactly on the radius-k Hamming ball around x, over inputs
/// x0..x{n-1}. Sequential-counter at-most-k over XOR literals.
Circuit hamming_circuit(const BitVector& x, std::size_t k);

struct NamedCircuit {
  std::string name;
  Circuit circuit;
};

/// Substitutes `lower` outputs (by name) for the inputs of every `upper`
/// circuit. Upper inputs not produced by `lower` are an error.
std::vector<NamedCircuit> compose_layers(const std::vector<NamedCircuit>& lower,
                                         const std::vector<NamedCircuit>& upper);

/// Composes a layered network into a single circuit over `primary_inputs`.
/// Layer 0 may only read primary inputs; layer L only outputs of layer L-1.
/// The last layer must hold exactly one circuit.
Circuit compose_network(const std::vector<std::string>& primary_inputs,
                        const std::vector<std::vector<NamedCircuit>>& layers,
                        bool simplify_result = true);

std::string to_json(const Circuit& c);
Circuit circuit_from_json(const std::string& text);

}  // namespace abdd
