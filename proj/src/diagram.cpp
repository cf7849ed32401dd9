#include "abdd/diagram.hpp"

#include <algorithm>
#include <ostream>

#include "abdd/error.hpp"
#include "json.hpp"

namespace abdd {

std::string to_string(DiagramKind k) {
  switch (k) {
    case DiagramKind::BDD: return "bdd";
    case DiagramKind::OBDD: return "obdd";
    case DiagramKind::ABDD: return "abdd";
  }
  return "bdd";
}

DiagramKind diagram_kind_from_string(const std::string& s) {
  if (s == "bdd") return DiagramKind::BDD;
  if (s == "obdd") return DiagramKind::OBDD;
  if (s == "abdd") return DiagramKind::ABDD;
  throw InputError("unknown diagram kind '" + s + "'");
}

Diagram::Diagram(std::size_t n, DiagramKind kind) : n_(n), kind_(kind), nodes_(2) {
  nodes_[0].alive = nodes_[1].alive = false;
}

Diagram Diagram::constant(std::size_t n, bool value, DiagramKind kind) {
  Diagram t(n, kind);
  t.root_ = value ? kTrueLeaf : kFalseLeaf;
  return t;
}

Diagram Diagram::open_root(std::size_t n, NodeId majority_leaf, DiagramKind kind) {
  Diagram t(n, kind);
  t.root_ = t.add_open(0, majority_leaf);
  return t;
}

void Diagram::set_root(NodeId r) {
  if (!contains(r)) throw StructuralError("set_root: unknown node");
  root_ = r;
}

const Node& Diagram::node(NodeId id) const {
  if (is_leaf(id) || id >= nodes_.size() || !nodes_[id].alive)
    throw StructuralError("no internal node with id " + std::to_string(id));
  return nodes_[id];
}

std::vector<NodeId> Diagram::live_nodes() const {
  std::vector<NodeId> out;
  for (NodeId id = 2; id < nodes_.size(); ++id)
    if (nodes_[id].alive) out.push_back(id);
  return out;
}

NodeId Diagram::add_node(Hypothesis label, NodeId lo, NodeId hi, std::uint32_t depth) {
  if (!contains(lo) || !contains(hi)) throw StructuralError("add_node: unknown child");
  if (label.is_projection() && label.index >= n_)
    throw StructuralError("add_node: label index out of range");
  const auto id = static_cast<NodeId>(nodes_.size());
  nodes_.push_back(Node{label, lo, hi, depth, true});
  return id;
}

NodeId Diagram::add_open(std::uint32_t depth, NodeId majority_leaf) {
  if (!is_leaf(majority_leaf)) throw StructuralError("add_open: majority must be a leaf");
  const auto id = static_cast<NodeId>(nodes_.size());
  nodes_.push_back(Node{std::nullopt, majority_leaf, majority_leaf, depth, true});
  return id;
}

void Diagram::expand(NodeId u, Hypothesis label, NodeId lo, NodeId hi) {
  node(u);
  if (!nodes_[u].open()) throw StructuralError("expand: node already labeled");
  if (!contains(lo) || !contains(hi)) throw StructuralError("expand: unknown child");
  if (label.is_projection() && label.index >= n_)
    throw StructuralError("expand: label index out of range");
  nodes_[u].label = label;
  nodes_[u].lo = lo;
  nodes_[u].hi = hi;
}

void Diagram::set_majority(NodeId u, NodeId leaf) {
  node(u);
  if (!nodes_[u].open() || !is_leaf(leaf)) throw StructuralError("set_majority: bad arguments");
  nodes_[u].lo = nodes_[u].hi = leaf;
}

void Diagram::redirect(const std::unordered_map<NodeId, NodeId>& remap) {
  if (remap.empty()) return;
  auto target = [&](NodeId id) {
    auto it = remap.find(id);
    return it == remap.end() ? id : it->second;
  };
  for (auto& [from, to] : remap) {
    if (is_leaf(from)) throw StructuralError("redirect: cannot remove a leaf");
    if (remap.count(to)) throw StructuralError("redirect: chained remap");
    if (!contains(to)) throw StructuralError("redirect: unknown target");
  }
  for (NodeId id = 2; id < nodes_.size(); ++id) {
    auto& nd = nodes_[id];
    if (!nd.alive || remap.count(id)) continue;
    nd.lo = target(nd.lo);
    nd.hi = target(nd.hi);
  }
  root_ = target(root_);
  for (auto& [from, to] : remap) nodes_.at(from).alive = false;
}

void Diagram::close_frontier() {
  std::unordered_map<NodeId, NodeId> remap;
  for (NodeId id = 2; id < nodes_.size(); ++id)
    if (nodes_[id].alive && nodes_[id].open()) remap.emplace(id, nodes_[id].lo);
  redirect(remap);
}

namespace {

// Post-order over reachable internal nodes; throws on a cycle or dangling edge.
std::vector<NodeId> reachable_postorder(const Diagram& t) {
  std::vector<NodeId> order;
  if (is_leaf(t.root())) return order;
  std::vector<std::uint8_t> color(t.handle_count(), 0);
  struct Frame {
    NodeId id;
    int next;
  };
  std::vector<Frame> stack{{t.root(), 0}};
  color[t.root()] = 1;
  while (!stack.empty()) {
    auto& fr = stack.back();
    const Node& nd = t.node(fr.id);
    if (fr.next < 2) {
      const NodeId child = fr.next == 0 ? nd.lo : nd.hi;
      ++fr.next;
      if (is_leaf(child)) continue;
      if (!t.contains(child))
        throw StructuralError("edge to missing node " + std::to_string(child));
      if (color[child] == 1) throw StructuralError("cycle through node " + std::to_string(child));
      if (color[child] == 0) {
        color[child] = 1;
        stack.push_back({child, 0});
      }
      continue;
    }
    color[fr.id] = 2;
    order.push_back(fr.id);
    stack.pop_back();
  }
  return order;
}

}  // namespace

void Diagram::recompute_depths() {
  auto post = reachable_postorder(*this);
  for (auto id : post) nodes_[id].depth = 0;
  for (auto it = post.rbegin(); it != post.rend(); ++it) {
    const auto& nd = nodes_[*it];
    for (NodeId c : {nd.lo, nd.hi})
      if (!is_leaf(c)) nodes_[c].depth = std::max(nodes_[c].depth, nd.depth + 1);
  }
}

Path route(const Diagram& t, const BitVector& x) {
  if (x.size() != t.dimension()) throw InputError("route: instance has wrong dimension");
  Path p;
  NodeId cur = t.root();
  while (!is_leaf(cur)) {
    if (p.nodes.size() >= t.handle_count()) throw StructuralError("route: cycle detected");
    const Node& nd = t.node(cur);
    p.nodes.push_back(cur);
    cur = (nd.open() || (*nd.label)(x) < 0) ? nd.lo : nd.hi;
  }
  p.leaf = cur;
  return p;
}

int evaluate(const Diagram& t, const BitVector& x) {
  return route(t, x).leaf == kTrueLeaf ? 1 : -1;
}

std::vector<NodeId> frontier(const Diagram& t) {
  std::vector<NodeId> out;
  const auto post = reachable_postorder(t);
  std::uint32_t max_depth = 0;
  for (auto id : post) max_depth = std::max(max_depth, t.node(id).depth);
  for (auto id : post) {
    const auto& nd = t.node(id);
    if (nd.open() && nd.depth == max_depth) out.push_back(id);
  }
  std::sort(out.begin(), out.end());
  return out;
}

ValidationReport validate(const Diagram& t, DiagramKind kind) {
  auto fail = [](std::string msg, NodeId a, NodeId b = 0) {
    return ValidationReport{false, std::move(msg), a, b};
  };
  std::vector<NodeId> post;
  try {
    post = reachable_postorder(t);
  } catch (const StructuralError& e) {
    return fail(e.what(), t.root());
  }
  std::vector<char> reach(t.handle_count(), 0);
  for (auto id : post) reach[id] = 1;
  for (auto id : t.live_nodes())
    if (!reach[id]) return fail("node unreachable from root", id);

  // Longest-path depths must match the stored ones.
  std::vector<std::uint32_t> longest(t.handle_count(), 0);
  for (auto it = post.rbegin(); it != post.rend(); ++it) {
    const auto& nd = t.node(*it);
    for (NodeId c : {nd.lo, nd.hi})
      if (!is_leaf(c)) longest[c] = std::max(longest[c], longest[*it] + 1);
  }
  std::uint32_t max_depth = 0;
  for (auto id : post) {
    if (longest[id] != t.node(id).depth) return fail("stored depth differs from longest path", id);
    max_depth = std::max(max_depth, longest[id]);
  }
  for (auto id : post) {
    const auto& nd = t.node(id);
    if (nd.open()) {
      if (nd.lo != nd.hi || !is_leaf(nd.lo)) return fail("open node must point to one leaf", id);
      if (nd.depth != max_depth) return fail("open node above the frontier", id);
    } else if (nd.label->is_projection() && nd.label->index >= t.dimension()) {
      return fail("label index out of range", id);
    }
  }

  if (kind == DiagramKind::ABDD) {
    std::vector<NodeId> by_depth(max_depth + 1, 0);
    for (auto it = post.rbegin(); it != post.rend(); ++it) {
      const auto& nd = t.node(*it);
      if (nd.open()) continue;
      NodeId& rep = by_depth[nd.depth];
      if (rep == 0) {
        rep = *it;
      } else if (!(*t.node(rep).label == *nd.label)) {
        return fail("nodes at equal depth carry different labels", rep, *it);
      }
    }
  } else if (kind == DiagramKind::OBDD) {
    std::vector<std::size_t> rank(t.dimension());
    if (t.order().empty()) {
      for (std::size_t i = 0; i < rank.size(); ++i) rank[i] = i;
    } else {
      if (t.order().size() != t.dimension()) return fail("variable order has wrong length", t.root());
      for (std::size_t r = 0; r < t.order().size(); ++r) rank.at(t.order()[r]) = r;
    }
    for (auto id : post) {
      const auto& nd = t.node(id);
      if (nd.open()) continue;
      if (!nd.label->is_projection()) return fail("OBDD labels must be variables", id);
      for (NodeId c : {nd.lo, nd.hi}) {
        if (is_leaf(c) || t.node(c).open()) continue;
        const auto& cl = *t.node(c).label;
        if (!cl.is_projection() || rank[cl.index] <= rank[nd.label->index])
          return fail("variable order violated along an edge", id, c);
      }
    }
  }
  return {};
}

std::vector<NodeStats> stats(const Diagram& t, const LabeledSample& s) {
  std::vector<NodeStats> out(t.handle_count());
  std::vector<std::size_t> pos(t.handle_count(), 0);
  const double m = static_cast<double>(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    const auto p = route(t, s[i].x);
    NodeId stop = p.leaf;
    for (auto id : p.nodes) {
      out[id].sample_ids.push_back(i);
      pos[id] += s[i].y > 0;
      if (t.node(id).open()) {
        stop = id;
        break;
      }
    }
    if (is_leaf(stop)) {
      out[stop].sample_ids.push_back(i);
      pos[stop] += s[i].y > 0;
    }
  }
  for (std::size_t id = 0; id < out.size(); ++id) {
    const auto c = out[id].sample_ids.size();
    out[id].p = static_cast<double>(c) / m;
    out[id].q = c == 0 ? 0.0 : static_cast<double>(pos[id]) / static_cast<double>(c);
  }
  return out;
}

double frontier_entropy(const Diagram& t, const LabeledSample& s) {
  const auto fr = frontier(t);
  if (fr.empty()) return 0.0;
  const auto st = stats(t, s);
  double h = 0.0;
  for (auto u : fr) h += st[u].p * pseudo_entropy(st[u].q);
  return h;
}

double training_error(const Diagram& t, const LabeledSample& s) {
  std::size_t wrong = 0;
  for (const auto& e : s.items()) wrong += evaluate(t, e.x) != e.y;
  return static_cast<double>(wrong) / static_cast<double>(s.size());
}

std::size_t size(const Diagram& t) { return reachable_postorder(t).size(); }

std::size_t width(const Diagram& t) {
  const auto post = reachable_postorder(t);
  std::unordered_map<std::uint32_t, std::size_t> per;
  std::size_t w = 0;
  for (auto id : post) w = std::max(w, ++per[t.node(id).depth]);
  return w;
}

std::size_t depth(const Diagram& t) {
  std::size_t d = 0;
  for (auto id : reachable_postorder(t)) d = std::max<std::size_t>(d, t.node(id).depth);
  return d;
}

namespace {

nlohmann::json label_json(const std::optional<Hypothesis>& h) {
  if (!h) return nullptr;
  if (h->kind == Hypothesis::Kind::Constant) return {{"const", h->value}};
  return {{"proj", h->index}, {"neg", h->kind == Hypothesis::Kind::NegatedProjection}};
}

}  // namespace

std::string to_json(const Diagram& t) {
  nlohmann::json j;
  j["kind"] = to_string(t.kind());
  j["n"] = t.dimension();
  j["root"] = t.root();
  auto nodes = nlohmann::json::array();
  for (auto id : t.live_nodes()) {
    const auto& nd = t.node(id);
    nodes.push_back({{"id", id}, {"depth", nd.depth}, {"label", label_json(nd.label)},
                     {"lo", nd.lo}, {"hi", nd.hi}});
  }
  j["nodes"] = std::move(nodes);
  if (!t.order().empty()) j["order"] = t.order();
  return j.dump(1);
}

Diagram diagram_from_json(const std::string& text) {
  try {
    const auto j = nlohmann::json::parse(text);
    Diagram t(j.at("n").get<std::size_t>(),
              diagram_kind_from_string(j.value("kind", std::string("bdd"))));
    struct Raw {
      NodeId id, lo, hi;
      std::uint32_t depth;
      std::optional<Hypothesis> label;
    };
    std::vector<Raw> raws;
    NodeId max_id = 1;
    for (const auto& nj : j.at("nodes")) {
      Raw r{nj.at("id").get<NodeId>(), nj.at("lo").get<NodeId>(), nj.at("hi").get<NodeId>(),
            nj.value("depth", 0u), std::nullopt};
      if (r.id < 2) throw InputError("internal node ids start at 2");
      const auto& lj = nj.at("label");
      if (!lj.is_null()) {
        if (lj.contains("const")) {
          r.label = Hypothesis::constant(lj["const"].get<int>());
        } else {
          const auto i = lj.at("proj").get<std::size_t>();
          r.label = lj.value("neg", false) ? Hypothesis::negated(i) : Hypothesis::projection(i);
        }
      }
      max_id = std::max(max_id, r.id);
      raws.push_back(r);
    }
    std::sort(raws.begin(), raws.end(), [](const Raw& a, const Raw& b) { return a.id < b.id; });
    // Allocate every handle up to max_id as an open placeholder, then fill in.
    std::vector<char> present(max_id + 1, 0);
    for (const auto& r : raws) {
      if (present[r.id]) throw InputError("duplicate node id " + std::to_string(r.id));
      present[r.id] = 1;
    }
    for (NodeId id = 2; id <= max_id; ++id) t.add_open(0, kFalseLeaf);
    for (const auto& r : raws) {
      if (r.lo > max_id || r.hi > max_id || (!is_leaf(r.lo) && !present[r.lo]) ||
          (!is_leaf(r.hi) && !present[r.hi]))
        throw InputError("node " + std::to_string(r.id) + " points to a missing node");
      if (r.label) {
        t.expand(r.id, *r.label, r.lo, r.hi);
      } else {
        if (r.lo != r.hi || !is_leaf(r.lo)) throw InputError("open node must point to one leaf");
        t.set_majority(r.id, r.lo);
      }
    }
    std::unordered_map<NodeId, NodeId> drop;
    for (NodeId id = 2; id <= max_id; ++id)
      if (!present[id]) drop.emplace(id, kFalseLeaf);
    t.redirect(drop);
    const auto root = j.at("root").get<NodeId>();
    if (root > max_id || (!is_leaf(root) && !present[root])) throw InputError("root is not a node");
    t.set_root(root);
    if (j.contains("order")) t.set_order(j["order"].get<std::vector<std::size_t>>());
    // Stored depths are advisory; the structure decides.
    t.recompute_depths();
    return t;
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("diagram JSON: ") + e.what());
  }
}

void write_dot(std::ostream& out, const Diagram& t) {
  out << "digraph abdd {\n";
  out << "  n0 [shape=box,label=\"0\"];\n  n1 [shape=box,label=\"1\"];\n";
  for (auto id : t.live_nodes()) {
    const auto& nd = t.node(id);
    out << "  n" << id << " [label=\"" << (nd.label ? nd.label->to_string() : std::string("?"))
        << "\"];\n";
    if (nd.open()) {
      out << "  n" << id << " -> n" << nd.lo << " [style=dotted];\n";
      continue;
    }
    out << "  n" << id << " -> n" << nd.hi << ";\n";
    out << "  n" << id << " -> n" << nd.lo << " [style=dashed];\n";
  }
  out << "}\n";
}

}  // namespace abdd
