#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "abdd/data.hpp"

namespace abdd {

using NodeId = std::uint32_t;

inline constexpr NodeId kFalseLeaf = 0;
inline constexpr NodeId kTrueLeaf = 1;

inline bool is_leaf(NodeId id) noexcept { return id <= kTrueLeaf; }

enum class DiagramKind { BDD, OBDD, ABDD };

std::string to_string(DiagramKind k);
DiagramKind diagram_kind_from_string(const std::string& s);

/// Internal node. An *open* node has no label yet: it sits on the growth
/// frontier and both edges point to its majority leaf.
struct Node {
  std::optional<Hypothesis> label;
  NodeId lo = kFalseLeaf;  // taken when the label evaluates to -1
  NodeId hi = kFalseLeaf;  // taken when the label evaluates to +1
  std::uint32_t depth = 0;
  bool alive = true;

  bool open() const noexcept { return !label.has_value(); }
};

struct Path {
  std::vector<NodeId> nodes;  // root first; excludes the leaf
  NodeId leaf = kFalseLeaf;
};

/// Reach statistics of one node under the uniform distribution over S.
struct NodeStats {
  double p = 0.0;
  double q = 0.0;  // 0 when the node is unreached
  std::vector<std::size_t> sample_ids;
};

struct ValidationReport {
  bool ok = true;
  std::string message;
  NodeId first = 0;
  NodeId second = 0;

  explicit operator bool() const noexcept { return ok; }
};

/// Rooted DAG with +/- edges, two leaves (ids 0 and 1) and hypothesis labels.
/// Ids are stable handles: merged nodes are tombstoned, never reused.
class Diagram {
 public:
  explicit Diagram(std::size_t n, DiagramKind kind = DiagramKind::ABDD);

  static Diagram constant(std::size_t n, bool value, DiagramKind kind = DiagramKind::ABDD);
  /// Diagram consisting of a single open root.
  static Diagram open_root(std::size_t n, NodeId majority_leaf = kTrueLeaf,
                           DiagramKind kind = DiagramKind::ABDD);

  std::size_t dimension() const noexcept { return n_; }
  DiagramKind kind() const noexcept { return kind_; }
  void set_kind(DiagramKind k) noexcept { kind_ = k; }
  NodeId root() const noexcept { return root_; }
  void set_root(NodeId r);

  /// Internal-node handles are 2 .. handle_count()-1; some may be tombstoned.
  std::size_t handle_count() const noexcept { return nodes_.size(); }
  const Node& node(NodeId id) const;
  bool contains(NodeId id) const noexcept {
    return id < nodes_.size() && (is_leaf(id) || nodes_[id].alive);
  }
  std::vector<NodeId> live_nodes() const;

  NodeId add_node(Hypothesis label, NodeId lo, NodeId hi, std::uint32_t depth);
  NodeId add_open(std::uint32_t depth, NodeId majority_leaf);
  /// Labels an open node and gives it children.
  void expand(NodeId u, Hypothesis label, NodeId lo, NodeId hi);
  void set_majority(NodeId open_node, NodeId leaf);
  /// Re-points every edge (and the root) aimed at a key to its value and
  /// tombstones the keys.
  void redirect(const std::unordered_map<NodeId, NodeId>& remap);
  /// Replaces every open node by its majority leaf.
  void close_frontier();
  /// Recomputes depths as longest root paths over live reachable nodes.
  void recompute_depths();

  /// Variable order used by OBDD validation; identity when empty.
  const std::vector<std::size_t>& order() const noexcept { return order_; }
  void set_order(std::vector<std::size_t> order) { order_ = std::move(order); }

 private:
  std::size_t n_;
  DiagramKind kind_;
  NodeId root_ = kFalseLeaf;
  std::vector<Node> nodes_;  // slots 0 and 1 are leaf placeholders
  std::vector<std::size_t> order_;
};

Path route(const Diagram& t, const BitVector& x);
int evaluate(const Diagram& t, const BitVector& x);

/// Open nodes at the maximum depth; empty for a completed diagram.
std::vector<NodeId> frontier(const Diagram& t);

ValidationReport validate(const Diagram& t, DiagramKind kind);

/// Indexed by node id (leaves included). Samples stop at open nodes.
std::vector<NodeStats> stats(const Diagram& t, const LabeledSample& s);

/// H_U(f|T) = sum over frontier nodes of p_u G(q_u).
double frontier_entropy(const Diagram& t, const LabeledSample& s);

/// Fraction of sample items misclassified by evaluate().
double training_error(const Diagram& t, const LabeledSample& s);

std::size_t size(const Diagram& t);   // live reachable internal nodes
std::size_t width(const Diagram& t);  // max nodes at one depth
std::size_t depth(const Diagram& t);  // max node depth

std::string to_json(const Diagram& t);
Diagram diagram_from_json(const std::string& text);
void write_dot(std::ostream& out, const Diagram& t);

}  // namespace abdd
