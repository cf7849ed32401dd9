#include "abdd/circuit.hpp"

#include <algorithm>
#include <unordered_set>

#include "abdd/error.hpp"
#include "json.hpp"

namespace abdd {

std::string input_name(std::size_t i) { return "x" + std::to_string(i); }

// --- builder ------------------------------------------------------------------

GateId CircuitBuilder::push(Gate g) {
  if (simplify_ && (g.op == GateOp::Not || g.op == GateOp::And || g.op == GateOp::Or)) {
    auto key = std::make_pair(g.op, g.in);
    if (auto it = strash_.find(key); it != strash_.end()) return it->second;
    const auto id = static_cast<GateId>(gates_.size());
    gates_.push_back(std::move(g));
    strash_.emplace(std::move(key), id);
    return id;
  }
  const auto id = static_cast<GateId>(gates_.size());
  gates_.push_back(std::move(g));
  return id;
}

GateId CircuitBuilder::constant(bool v) {
  if (!has_const_[v]) {
    Gate g;
    g.op = GateOp::Const;
    g.value = v;
    const_gate_[v] = push(std::move(g));
    has_const_[v] = true;
  }
  return const_gate_[v];
}

void CircuitBuilder::declare_input(const std::string& name) {
  if (input_index_.count(name)) return;
  input_index_.emplace(name, static_cast<std::uint32_t>(inputs_.size()));
  inputs_.push_back(name);
}

GateId CircuitBuilder::var(const std::string& name) {
  declare_input(name);
  const auto idx = input_index_.at(name);
  if (auto it = var_gate_.find(idx); it != var_gate_.end()) return it->second;
  Gate g;
  g.op = GateOp::Var;
  g.var = idx;
  const auto id = push(std::move(g));
  var_gate_.emplace(idx, id);
  return id;
}

GateId CircuitBuilder::lnot(GateId a) {
  if (a >= gates_.size()) throw StructuralError("lnot: unknown gate");
  if (simplify_) {
    const auto& g = gates_[a];
    if (g.op == GateOp::Const) return constant(!g.value);
    if (g.op == GateOp::Not) return g.in[0];
  }
  Gate g;
  g.op = GateOp::Not;
  g.in = {a};
  return push(std::move(g));
}

GateId CircuitBuilder::nary(GateOp op, std::vector<GateId> in) {
  for (auto id : in)
    if (id >= gates_.size()) throw StructuralError("gate fanin out of range");
  const bool absorbing = op == GateOp::Or;  // AND absorbs false, OR absorbs true
  if (simplify_) {
    std::vector<GateId> kept;
    for (auto id : in) {
      if (is_const(id, absorbing)) return constant(absorbing);
      if (is_const(id, !absorbing)) continue;
      kept.push_back(id);
    }
    std::sort(kept.begin(), kept.end());
    kept.erase(std::unique(kept.begin(), kept.end()), kept.end());
    // x op !x
    for (auto id : kept) {
      const auto& g = gates_[id];
      if (g.op == GateOp::Not && std::binary_search(kept.begin(), kept.end(), g.in[0]))
        return constant(absorbing);
    }
    in = std::move(kept);
  }
  if (in.empty()) return constant(!absorbing);
  if (in.size() == 1) return in.front();
  Gate g;
  g.op = op;
  g.in = std::move(in);
  return push(std::move(g));
}

GateId CircuitBuilder::land(GateId a, GateId b) { return nary(GateOp::And, {a, b}); }
GateId CircuitBuilder::lor(GateId a, GateId b) { return nary(GateOp::Or, {a, b}); }
GateId CircuitBuilder::land(std::vector<GateId> in) { return nary(GateOp::And, std::move(in)); }
GateId CircuitBuilder::lor(std::vector<GateId> in) { return nary(GateOp::Or, std::move(in)); }

GateId CircuitBuilder::embed(const Circuit& c, const std::unordered_map<std::string, GateId>& bind) {
  check_circuit(c);
  std::vector<GateId> image(c.gates.size());
  for (std::size_t id = 0; id < c.gates.size(); ++id) {
    const auto& g = c.gates[id];
    std::vector<GateId> in;
    in.reserve(g.in.size());
    for (auto f : g.in) in.push_back(image[f]);
    switch (g.op) {
      case GateOp::Const: image[id] = constant(g.value); break;
      case GateOp::Var: {
        const auto& name = c.inputs[g.var];
        auto it = bind.find(name);
        image[id] = it != bind.end() ? it->second : var(name);
        break;
      }
      case GateOp::Not: image[id] = lnot(in[0]); break;
      case GateOp::And: image[id] = nary(GateOp::And, std::move(in)); break;
      case GateOp::Or: image[id] = nary(GateOp::Or, std::move(in)); break;
    }
  }
  return image[c.output];
}

Circuit CircuitBuilder::build(GateId output) const {
  if (output >= gates_.size()) throw StructuralError("build: unknown output gate");
  std::vector<char> live(gates_.size(), 0);
  live[output] = 1;
  for (std::size_t id = gates_.size(); id-- > 0;) {
    if (!live[id]) continue;
    for (auto f : gates_[id].in) live[f] = 1;
  }
  Circuit c;
  c.inputs = inputs_;
  std::vector<GateId> renum(gates_.size(), 0);
  for (std::size_t id = 0; id < gates_.size(); ++id) {
    if (!live[id]) continue;
    Gate g = gates_[id];
    for (auto& f : g.in) f = renum[f];
    renum[id] = static_cast<GateId>(c.gates.size());
    c.gates.push_back(std::move(g));
  }
  c.output = renum[output];
  return c;
}

// --- diagram compilation --------------------------------------------------------

Circuit dd_to_circuit(const Diagram& t, const CompileOptions& opts) {
  if (auto rep = validate(t, DiagramKind::BDD); !rep)
    throw StructuralError("dd_to_circuit: " + rep.message);
  CircuitBuilder b(opts.simplify);
  for (std::size_t i = 0; i < t.dimension(); ++i) b.declare_input(input_name(i));
  std::unordered_map<NodeId, GateId> memo;
  // (lit, NOT lit) for a label: a negated projection reuses the variable as
  // its complement, so every node costs one NOT, two ANDs and one OR.
  auto literals = [&](const Hypothesis& h) -> std::pair<GateId, GateId> {
    switch (h.kind) {
      case Hypothesis::Kind::Projection: {
        const GateId v = b.var(input_name(h.index));
        return {v, b.lnot(v)};
      }
      case Hypothesis::Kind::NegatedProjection: {
        const GateId v = b.var(input_name(h.index));
        return {b.lnot(v), v};
      }
      case Hypothesis::Kind::Constant: break;
    }
    const GateId c = b.constant(h.value > 0);
    return {c, b.lnot(c)};
  };
  // Children are compiled before parents (reverse topological order).
  std::vector<NodeId> order;
  {
    std::vector<char> seen(t.handle_count(), 0);
    std::vector<std::pair<NodeId, bool>> stack;
    if (!is_leaf(t.root())) stack.emplace_back(t.root(), false);
    while (!stack.empty()) {
      auto [id, expanded] = stack.back();
      stack.pop_back();
      if (expanded) {
        order.push_back(id);
        continue;
      }
      if (seen[id]) continue;
      seen[id] = 1;
      stack.emplace_back(id, true);
      const auto& nd = t.node(id);
      for (NodeId c : {nd.hi, nd.lo})
        if (!is_leaf(c) && !seen[c]) stack.emplace_back(c, false);
    }
  }
  auto image = [&](NodeId id) -> GateId {
    if (id == kTrueLeaf) return b.constant(true);
    if (id == kFalseLeaf) return b.constant(false);
    return memo.at(id);
  };
  for (auto id : order) {
    const auto& nd = t.node(id);
    if (nd.open()) {
      memo[id] = image(nd.lo);
      continue;
    }
    const auto [lit, nlit] = literals(*nd.label);
    const GateId hi = b.land(lit, image(nd.hi));
    const GateId lo = b.land(nlit, image(nd.lo));
    memo[id] = b.lor(hi, lo);
  }
  return b.build(image(t.root()));
}

// --- evaluation and wrappers ------------------------------------------------------

namespace {

bool eval_values(const Circuit& c, const std::vector<bool>& inputs) {
  std::vector<char> v(c.gates.size(), 0);
  for (std::size_t id = 0; id < c.gates.size(); ++id) {
    const auto& g = c.gates[id];
    switch (g.op) {
      case GateOp::Const: v[id] = g.value; break;
      case GateOp::Var: v[id] = inputs[g.var]; break;
      case GateOp::Not: v[id] = !v[g.in[0]]; break;
      case GateOp::And: {
        char r = 1;
        for (auto f : g.in) r = r && v[f];
        v[id] = r;
        break;
      }
      case GateOp::Or: {
        char r = 0;
        for (auto f : g.in) r = r || v[f];
        v[id] = r;
        break;
      }
    }
  }
  return v[c.output];
}

}  // namespace

bool eval_circuit(const Circuit& c, const std::vector<bool>& assignment) {
  if (assignment.size() != c.inputs.size()) throw InputError("eval_circuit: assignment size mismatch");
  if (c.gates.empty()) throw StructuralError("eval_circuit: empty circuit");
  return eval_values(c, assignment);
}

bool eval_circuit(const Circuit& c, const BitVector& x) {
  std::vector<bool> a(c.inputs.size());
  for (std::size_t k = 0; k < c.inputs.size(); ++k) {
    const auto& name = c.inputs[k];
    std::size_t idx = 0;
    try {
      if (name.size() < 2 || name[0] != 'x') throw std::invalid_argument(name);
      std::size_t used = 0;
      idx = std::stoul(name.substr(1), &used);
      if (used != name.size() - 1) throw std::invalid_argument(name);
    } catch (const std::exception&) {
      throw InputError("eval_circuit: input '" + name + "' is not of the form x<i>");
    }
    if (idx >= x.size()) throw InputError("eval_circuit: instance too short for " + name);
    a[k] = x[idx] > 0;
  }
  return eval_circuit(c, a);
}

bool eval_circuit(const Circuit& c, const std::unordered_map<std::string, bool>& assignment) {
  std::vector<bool> a(c.inputs.size());
  for (std::size_t k = 0; k < c.inputs.size(); ++k) {
    auto it = assignment.find(c.inputs[k]);
    if (it == assignment.end()) throw InputError("eval_circuit: missing input " + c.inputs[k]);
    a[k] = it->second;
  }
  return eval_circuit(c, a);
}

Circuit negate(const Circuit& c) {
  CircuitBuilder b(false);
  for (const auto& name : c.inputs) b.declare_input(name);
  const auto out = b.embed(c);
  return b.build(b.lnot(out));
}

Circuit conjoin(const Circuit& c1, const Circuit& c2) {
  CircuitBuilder b(false);
  for (const auto& name : c1.inputs) b.declare_input(name);
  for (const auto& name : c2.inputs) b.declare_input(name);
  const auto o1 = b.embed(c1);
  const auto o2 = b.embed(c2);
  return b.build(b.land(o1, o2));
}

Circuit simplify(const Circuit& c) {
  CircuitBuilder b(true);
  for (const auto& name : c.inputs) b.declare_input(name);
  return b.build(b.embed(c));
}

std::size_t gate_count(const Circuit& c) {
  return static_cast<std::size_t>(std::count_if(c.gates.begin(), c.gates.end(), [](const Gate& g) {
    return g.op == GateOp::And || g.op == GateOp::Or || g.op == GateOp::Not;
  }));
}

void check_circuit(const Circuit& c) {
  if (c.gates.empty()) throw StructuralError("circuit has no gates");
  if (c.output >= c.gates.size()) throw StructuralError("circuit output out of range");
  for (std::size_t id = 0; id < c.gates.size(); ++id) {
    const auto& g = c.gates[id];
    for (auto f : g.in)
      if (f >= id) throw StructuralError("gate " + std::to_string(id) + " is not topologically ordered");
    switch (g.op) {
      case GateOp::Const:
        if (!g.in.empty()) throw StructuralError("constant gate with fanins");
        break;
      case GateOp::Var:
        if (!g.in.empty() || g.var >= c.inputs.size())
          throw StructuralError("variable gate references an unknown input");
        break;
      case GateOp::Not:
        if (g.in.size() != 1) throw StructuralError("NOT gate must have one fanin");
        break;
      case GateOp::And:
      case GateOp::Or:
        if (g.in.size() < 2) throw StructuralError("AND/OR gate needs at least two fanins");
        break;
    }
  }
}

// --- Hamming ball -------------------------------------------------------------------

Circuit hamming_circuit(const BitVector& x, std::size_t k) {
  const std::size_t n = x.size();
  if (k > n) throw DomainError("hamming_circuit: radius exceeds dimension");
  CircuitBuilder b(true);
  for (std::size_t i = 0; i < n; ++i) b.declare_input(input_name(i));
  // at_least[j]: at least j of the coordinates seen so far differ from x.
  std::vector<GateId> at_least(k + 2, b.constant(false));
  at_least[0] = b.constant(true);
  for (std::size_t i = 0; i < n; ++i) {
    const GateId v = b.var(input_name(i));
    const GateId differs = x[i] > 0 ? b.lnot(v) : v;
    for (std::size_t j = k + 1; j >= 1; --j)
      at_least[j] = b.lor(at_least[j], b.land(differs, at_least[j - 1]));
  }
  return b.build(b.lnot(at_least[k + 1]));
}

// --- composition --------------------------------------------------------------------

std::vector<NamedCircuit> compose_layers(const std::vector<NamedCircuit>& lower,
                                         const std::vector<NamedCircuit>& upper) {
  std::unordered_map<std::string, const NamedCircuit*> by_name;
  for (const auto& nc : lower)
    if (!by_name.emplace(nc.name, &nc).second) throw InputError("duplicate circuit name " + nc.name);
  std::vector<NamedCircuit> out;
  for (const auto& up : upper) {
    CircuitBuilder b(true);
    for (const auto& nc : lower)
      for (const auto& name : nc.circuit.inputs) b.declare_input(name);
    std::unordered_map<std::string, GateId> bind;
    for (const auto& name : up.circuit.inputs) {
      auto it = by_name.find(name);
      if (it == by_name.end())
        throw InputError("compose: input '" + name + "' of " + up.name + " is not produced below");
      bind.emplace(name, b.embed(it->second->circuit));
    }
    out.push_back({up.name, b.build(b.embed(up.circuit, bind))});
  }
  return out;
}

Circuit compose_network(const std::vector<std::string>& primary_inputs,
                        const std::vector<std::vector<NamedCircuit>>& layers,
                        bool simplify_result) {
  if (layers.empty()) throw InputError("compose_network: no layers");
  if (layers.back().size() != 1) throw InputError("compose_network: last layer must have one output");
  CircuitBuilder b(simplify_result);
  std::unordered_map<std::string, GateId> current;
  for (const auto& name : primary_inputs) {
    if (current.count(name)) throw InputError("duplicate primary input " + name);
    current.emplace(name, b.var(name));
  }
  GateId out = 0;
  for (std::size_t l = 0; l < layers.size(); ++l) {
    std::unordered_map<std::string, GateId> next;
    for (const auto& nc : layers[l]) {
      for (const auto& name : nc.circuit.inputs)
        if (!current.count(name))
          throw InputError("compose_network: layer " + std::to_string(l) + " circuit " + nc.name +
                           " reads unknown signal '" + name + "'");
      out = b.embed(nc.circuit, current);
      if (!next.emplace(nc.name, out).second)
        throw InputError("compose_network: duplicate output name " + nc.name);
    }
    current = std::move(next);
  }
  Circuit c = b.build(out);
  check_circuit(c);
  return c;
}

// --- JSON -----------------------------------------------------------------------------

namespace {

const char* op_name(GateOp op) {
  switch (op) {
    case GateOp::Const: return "const";
    case GateOp::Var: return "var";
    case GateOp::Not: return "not";
    case GateOp::And: return "and";
    case GateOp::Or: return "or";
  }
  return "?";
}

}  // namespace

std::string to_json(const Circuit& c) {
  nlohmann::json j;
  j["inputs"] = c.inputs;
  auto gates = nlohmann::json::array();
  for (std::size_t id = 0; id < c.gates.size(); ++id) {
    const auto& g = c.gates[id];
    nlohmann::json gj{{"id", id}, {"op", op_name(g.op)}};
    if (g.op == GateOp::Const) gj["value"] = g.value;
    else if (g.op == GateOp::Var) gj["var"] = c.inputs[g.var];
    else gj["in"] = g.in;
    gates.push_back(std::move(gj));
  }
  j["gates"] = std::move(gates);
  j["output"] = c.output;
  return j.dump();
}

Circuit circuit_from_json(const std::string& text) {
  try {
    const auto j = nlohmann::json::parse(text);
    Circuit c;
    c.inputs = j.at("inputs").get<std::vector<std::string>>();
    std::unordered_map<std::string, std::uint32_t> idx;
    for (std::uint32_t i = 0; i < c.inputs.size(); ++i) idx.emplace(c.inputs[i], i);
    std::size_t expect = 0;
    for (const auto& gj : j.at("gates")) {
      if (gj.at("id").get<std::size_t>() != expect++) throw InputError("circuit JSON: gate ids must be dense");
      Gate g;
      const auto op = gj.at("op").get<std::string>();
      if (op == "const") {
        g.op = GateOp::Const;
        g.value = gj.at("value").get<bool>();
      } else if (op == "var") {
        g.op = GateOp::Var;
        const auto name = gj.at("var").get<std::string>();
        auto it = idx.find(name);
        if (it == idx.end()) throw InputError("circuit JSON: unknown input " + name);
        g.var = it->second;
      } else {
        if (op == "not") g.op = GateOp::Not;
        else if (op == "and") g.op = GateOp::And;
        else if (op == "or") g.op = GateOp::Or;
        else throw InputError("circuit JSON: unknown op " + op);
        g.in = gj.at("in").get<std::vector<GateId>>();
      }
      c.gates.push_back(std::move(g));
    }
    c.output = j.at("output").get<GateId>();
    check_circuit(c);
    return c;
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("circuit JSON: ") + e.what());
  } catch (const StructuralError& e) {
    throw InputError(std::string("circuit JSON: ") + e.what());
  }
}

}  // namespace abdd
