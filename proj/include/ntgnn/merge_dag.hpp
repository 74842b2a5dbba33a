#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

#include "ntgnn/canon.hpp"
#include "ntgnn/error.hpp"
#include "ntgnn/tree_builder.hpp"

namespace ntgnn {

// Node labeling used for canonization while merging: phi identifies tree
// nodes by their origin vertex, mu only by the vertex label.
enum class Labeling { phi, mu };

inline Labeling parse_labeling(std::string_view name) {
  if (name == "phi") return Labeling::phi;
  if (name == "mu") return Labeling::mu;
  throw ArgumentError("labeling must be phi or mu, got '" + std::string(name) + "'");
}
inline const char* to_string(Labeling l) { return l == Labeling::phi ? "phi" : "mu"; }

struct MergeNode {
  Label canon_label = 0;   // label fed to canonization (origin id under phi)
  Label attr_label = 0;    // mu label of the origin vertex
  std::int32_t origin_graph = 0;
  VertexId origin_vertex = 0;  // under mu: first vertex seen with this code
  Code code = kNoCode;
};

struct MergeEdge {
  NodeId child;
  NodeId parent;
  std::uint32_t mult;

  friend bool operator==(const MergeEdge&, const MergeEdge&) = default;
};

// Merge DAG (D, xi) of a set of trees: one node per canonical code, edge
// multiplicities for merged isomorphic siblings, and xi mapping every input
// tree to the node whose expansion reproduces it.
class MergeDag {
 public:
  explicit MergeDag(Labeling labeling = Labeling::mu) : labeling_(labeling) {}

  Labeling labeling() const { return labeling_; }

  // Adds one tree (or compact DAG) and returns its tree index. Nodes whose
  // code is already present are reused; missing nodes are created in
  // height order so children always exist before their parents.
  std::size_t add_tree(const CompactTreeDag& tree) {
    if (labeling_ == Labeling::mu && !tree.discrete_labels) {
      throw ArgumentError("labeling=mu needs discrete vertex labels; use phi for continuous features");
    }
    if (labeling_ == Labeling::phi) {
      if (phi_graph_ && *phi_graph_ != tree.graph_id) {
        throw ArgumentError("labeling=phi merges trees of a single graph only (got graphs " +
                            std::to_string(*phi_graph_) + " and " + std::to_string(tree.graph_id) + ")");
      }
      phi_graph_ = tree.graph_id;
    }
    const auto labels = labeling_ == Labeling::phi ? tree.phi_labels() : tree.mu_labels();
    const auto canon = canonize_dag(labels, tree.children, table_);

    std::vector<NodeId> order(tree.num_nodes());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<NodeId>(i);
    std::stable_sort(order.begin(), order.end(),
                     [&](NodeId a, NodeId b) { return canon.heights[a] < canon.heights[b]; });

    std::map<Code, std::uint32_t> child_mult;
    for (NodeId v : order) {
      const Code code = canon.codes[v];
      if (static_cast<std::size_t>(code) < by_code_.size() && by_code_[code] >= 0) continue;
      MergeNode node{labels[v], tree.nodes[v].label, tree.graph_id, tree.nodes[v].origin, code};
      NodeId id = push_node(node);
      if (by_code_.size() <= static_cast<std::size_t>(code)) by_code_.resize(code + 1, -1);
      by_code_[code] = id;
      child_mult.clear();
      for (const auto& c : tree.children[v]) child_mult[canon.codes[c.node]] += c.mult;
      for (auto [child_code, mult] : child_mult) children_[id].push_back({by_code_[child_code], mult});
    }
    xi_.push_back(by_code_[canon.codes[tree.root]]);
    layers_valid_ = false;
    return xi_.size() - 1;
  }

  // Manual construction (tests, hand-built DAGs). Nodes added this way carry
  // no canonical code.
  NodeId add_node(Label canon_label, Label attr_label, std::int32_t origin_graph = 0,
                  VertexId origin_vertex = 0) {
    layers_valid_ = false;
    return push_node({canon_label, attr_label, origin_graph, origin_vertex, kNoCode});
  }

  void add_edge(NodeId child, NodeId parent, std::uint32_t mult = 1) {
    check_node(child);
    check_node(parent);
    layers_valid_ = false;
    for (auto& c : children_[parent]) {
      if (c.node == child) {
        c.mult += mult;
        return;
      }
    }
    children_[parent].push_back({child, mult});
  }

  std::size_t add_root(NodeId node) {
    check_node(node);
    xi_.push_back(node);
    return xi_.size() - 1;
  }

  // Disjoint union; codes of the appended part stay those of its own table.
  void append_disjoint(const MergeDag& other) {
    const auto offset = static_cast<NodeId>(nodes_.size());
    for (std::size_t v = 0; v < other.nodes_.size(); ++v) {
      push_node(other.nodes_[v]);
      for (const auto& c : other.children_[v]) children_.back().push_back({c.node + offset, c.mult});
    }
    for (NodeId r : other.xi_) xi_.push_back(r + offset);
    layers_valid_ = false;
  }

  // Heights, node layers L_0..L_H and edge layers E_1..E_H (edges grouped by
  // the layer of their parent). Throws StructureError on a cycle.
  void compute_layers() {
    heights_ = dag_heights(children_);
    std::int32_t max_h = -1;
    for (auto h : heights_) max_h = std::max(max_h, h);
    layers_.assign(max_h + 1, {});
    edge_layers_.assign(max_h + 1, {});
    for (std::size_t v = 0; v < nodes_.size(); ++v) layers_[heights_[v]].push_back(static_cast<NodeId>(v));
    for (std::size_t p = 0; p < nodes_.size(); ++p) {
      for (const auto& c : children_[p]) {
        edge_layers_[heights_[p]].push_back({c.node, static_cast<NodeId>(p), c.mult});
      }
    }
    layers_valid_ = true;
  }

  bool layers_computed() const { return layers_valid_; }

  std::size_t num_nodes() const { return nodes_.size(); }
  std::size_t num_edges() const {
    std::size_t e = 0;
    for (const auto& ch : children_) e += ch.size();
    return e;
  }
  const std::vector<MergeNode>& nodes() const { return nodes_; }
  const MergeNode& node(NodeId v) const { return nodes_[v]; }
  const ChildLists& children() const { return children_; }
  const std::vector<NodeId>& xi() const { return xi_; }
  NodeId xi(std::size_t tree_index) const { return xi_.at(tree_index); }
  const CanonTable& table() const { return table_; }

  std::vector<MergeEdge> edges() const {
    std::vector<MergeEdge> out;
    for (std::size_t p = 0; p < children_.size(); ++p) {
      for (const auto& c : children_[p]) out.push_back({c.node, static_cast<NodeId>(p), c.mult});
    }
    return out;
  }

  // Valid after compute_layers().
  std::size_t height() const { return layers_.empty() ? 0 : layers_.size() - 1; }
  const std::vector<std::int32_t>& heights() const { return require_layers(heights_); }
  const std::vector<std::vector<NodeId>>& layers() const { return require_layers(layers_); }
  // edge_layers()[i] is E_i; edge_layers()[0] is always empty.
  const std::vector<std::vector<MergeEdge>>& edge_layers() const { return require_layers(edge_layers_); }

 private:
  NodeId push_node(const MergeNode& node) {
    nodes_.push_back(node);
    children_.emplace_back();
    return static_cast<NodeId>(nodes_.size() - 1);
  }
  void check_node(NodeId v) const {
    if (v < 0 || static_cast<std::size_t>(v) >= nodes_.size()) {
      throw ArgumentError("node id " + std::to_string(v) + " out of range");
    }
  }
  template <typename T>
  const T& require_layers(const T& value) const {
    if (!layers_valid_) throw StructureError("compute_layers() has not been called since the last change");
    return value;
  }

  Labeling labeling_;
  CanonTable table_;
  std::vector<NodeId> by_code_;
  std::vector<MergeNode> nodes_;
  ChildLists children_;
  std::vector<NodeId> xi_;
  std::optional<std::int32_t> phi_graph_;

  bool layers_valid_ = false;
  std::vector<std::int32_t> heights_;
  std::vector<std::vector<NodeId>> layers_;
  std::vector<std::vector<MergeEdge>> edge_layers_;
};

inline MergeDag merge_trees(std::span<const CompactTreeDag> trees, Labeling labeling) {
  MergeDag dag(labeling);
  for (const auto& t : trees) dag.add_tree(t);
  dag.compute_layers();
  return dag;
}

inline void compute_layers(MergeDag& d) { d.compute_layers(); }

// Tree rooted at xi(tree_index) in compact form: nodes are (DAG node, depth)
// pairs, so the result is a valid input to expand_to_tree and to merging.
inline CompactTreeDag extract_tree(const MergeDag& d, std::size_t tree_index) {
  CompactTreeDag out;
  const NodeId root = d.xi(tree_index);
  std::map<std::pair<NodeId, std::uint32_t>, NodeId> ids;
  std::vector<std::pair<NodeId, std::uint32_t>> stack;
  auto intern = [&](NodeId v, std::uint32_t depth) {
    auto [it, inserted] = ids.try_emplace({v, depth}, static_cast<NodeId>(out.nodes.size()));
    if (inserted) {
      const auto& n = d.node(v);
      out.nodes.push_back({n.origin_vertex, depth, n.attr_label});
      out.children.emplace_back();
      out.height = std::max(out.height, depth);
      stack.emplace_back(v, depth);
    }
    return it->second;
  };
  out.root = intern(root, 0);
  out.graph_id = d.node(root).origin_graph;
  while (!stack.empty()) {
    auto [v, depth] = stack.back();
    stack.pop_back();
    const NodeId self = ids.at({v, depth});
    for (const auto& c : d.children()[v]) {
      NodeId child = intern(c.node, depth + 1);
      out.children[self].push_back({child, c.mult});
    }
  }
  return out;
}

// Sorted multiset of root codes per group of tree indices.
inline std::vector<std::vector<Code>> multiset_signature(const MergeDag& d,
                                                         const std::vector<std::vector<std::size_t>>& groups) {
  std::vector<std::vector<Code>> out;
  out.reserve(groups.size());
  for (const auto& group : groups) {
    std::vector<Code> codes;
    codes.reserve(group.size());
    for (std::size_t t : group) codes.push_back(d.node(d.xi(t)).code);
    std::sort(codes.begin(), codes.end());
    out.push_back(std::move(codes));
  }
  return out;
}

// For every node of height i >= 1, the node of height i-1 with the same
// origin vertex (the previous-iteration self embedding of Eq.-(1)-style
// message passing). Needs a phi-labeled merge of unfolding trees; throws
// ArgumentError when a node has no unique predecessor.
inline std::vector<NodeId> self_links_by_origin(const MergeDag& d) {
  const auto& layers = d.layers();
  std::vector<NodeId> links(d.num_nodes(), -1);
  for (std::size_t i = 1; i < layers.size(); ++i) {
    std::map<std::pair<std::int32_t, VertexId>, NodeId> prev;
    for (NodeId v : layers[i - 1]) {
      auto key = std::make_pair(d.node(v).origin_graph, d.node(v).origin_vertex);
      if (!prev.emplace(key, v).second) throw ArgumentError("origin vertex occurs twice in one layer");
    }
    for (NodeId v : layers[i]) {
      auto it = prev.find({d.node(v).origin_graph, d.node(v).origin_vertex});
      if (it == prev.end()) throw ArgumentError("node without same-origin predecessor layer entry");
      links[v] = it->second;
    }
  }
  return links;
}

// DAG JSON schema: {nodes:[{id,label,origin_graph,origin_vertex,height,code}],
// edges:[[child,parent,mult]], roots:{tree_index:node_id}}.
inline nlohmann::json merge_dag_to_json(const MergeDag& d) {
  nlohmann::json out;
  auto nodes = nlohmann::json::array();
  const auto& heights = d.heights();
  for (std::size_t v = 0; v < d.num_nodes(); ++v) {
    const auto& n = d.node(static_cast<NodeId>(v));
    nodes.push_back({{"id", v},
                     {"label", n.attr_label},
                     {"origin_graph", n.origin_graph},
                     {"origin_vertex", n.origin_vertex},
                     {"height", heights[v]},
                     {"code", n.code}});
  }
  auto edges = nlohmann::json::array();
  for (const auto& e : d.edges()) edges.push_back({e.child, e.parent, e.mult});
  auto roots = nlohmann::json::object();
  for (std::size_t t = 0; t < d.xi().size(); ++t) roots[std::to_string(t)] = d.xi(t);
  out["nodes"] = std::move(nodes);
  out["edges"] = std::move(edges);
  out["roots"] = std::move(roots);
  return out;
}

}  // namespace ntgnn
