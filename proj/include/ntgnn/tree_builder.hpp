#pragma once

#include <algorithm>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "ntgnn/canon.hpp"
#include "ntgnn/error.hpp"
#include "ntgnn/graph.hpp"

namespace ntgnn {

// Redundancy parameter k of a neighborhood tree; nullopt means unbounded
// (the unfolding tree).
using Redundancy = std::optional<std::uint32_t>;
inline constexpr Redundancy kUnfolding = std::nullopt;

struct TreeNode {
  VertexId origin;      // phi: the graph vertex this node represents
  std::uint32_t depth;  // distance to the root inside the tree
  Label label;          // mu(origin)
};

// Compact DAG of one unfolding tree / k-NT. Node (w, d) stands for every
// occurrence of w at depth d; its children are the grid nodes (u, d+1) with
// u in N(w). Expanding from the root (duplicating shared nodes) yields the
// tree itself.
struct CompactTreeDag {
  std::vector<TreeNode> nodes;
  ChildLists children;
  NodeId root = 0;
  std::uint32_t height = 0;
  Redundancy k = kUnfolding;
  VertexId source_root_vertex = 0;
  std::int32_t graph_id = 0;
  bool discrete_labels = true;

  std::size_t num_nodes() const { return nodes.size(); }
  std::size_t num_edges() const {
    std::size_t e = 0;
    for (const auto& ch : children) e += ch.size();
    return e;
  }

  std::vector<Label> mu_labels() const {
    std::vector<Label> out(nodes.size());
    for (std::size_t i = 0; i < nodes.size(); ++i) out[i] = nodes[i].label;
    return out;
  }
  std::vector<Label> phi_labels() const {
    std::vector<Label> out(nodes.size());
    for (std::size_t i = 0; i < nodes.size(); ++i) out[i] = nodes[i].origin;
    return out;
  }
};

// Builds the compact DAG of T_{height,k}^v by a BFS over the (vertex, depth)
// grid. Node (w, d) exists iff it is reachable from the root and
// d <= dist(v, w) + k; dist(v, w) is the minimum depth of w in the unfolding
// tree, so the pruning condition is local. With k unbounded (or k >= height)
// this is the unfolding tree F_height^v.
inline CompactTreeDag build_knt_dag(const LabeledGraph& g, VertexId v, std::uint32_t height,
                                    Redundancy k, std::int32_t graph_id = 0) {
  if (v < 0 || static_cast<std::size_t>(v) >= g.num_vertices()) {
    throw ArgumentError("root vertex " + std::to_string(v) + " out of range");
  }
  CompactTreeDag dag;
  dag.height = height;
  dag.k = k;
  dag.source_root_vertex = v;
  dag.graph_id = graph_id;
  dag.discrete_labels = g.has_discrete_labels();

  const std::int64_t slack = (!k || *k >= height) ? std::int64_t{height} : std::int64_t{*k};
  const auto dist = bfs_distances(g, v);

  dag.nodes.push_back({v, 0, g.label(v)});
  dag.children.emplace_back();

  // slot[w] = node id of (w, depth+1) while building the next level.
  std::vector<NodeId> slot(g.num_vertices(), -1);
  std::size_t level_begin = 0, level_end = 1;
  for (std::uint32_t depth = 0; depth < height; ++depth) {
    std::vector<VertexId> touched;
    for (std::size_t p = level_begin; p < level_end; ++p) {
      const VertexId w = dag.nodes[p].origin;
      for (VertexId u : g.neighbors(w)) {
        if (std::int64_t{depth} + 1 > std::int64_t{dist[u]} + slack) continue;
        if (slot[u] < 0) {
          slot[u] = static_cast<NodeId>(dag.nodes.size());
          dag.nodes.push_back({u, depth + 1, g.label(u)});
          dag.children.emplace_back();
          touched.push_back(u);
        }
        dag.children[p].push_back({slot[u], 1});
      }
    }
    for (VertexId u : touched) slot[u] = -1;
    level_begin = level_end;
    level_end = dag.nodes.size();
    if (level_begin == level_end) break;
  }
  return dag;
}

enum class ExpansionLabel { vertex_label, origin };

// Materializes the tree encoded by a compact DAG. Throws BudgetError when
// the tree would have more than max_nodes nodes.
inline RootedTree expand_to_tree(const CompactTreeDag& dag, std::size_t max_nodes,
                                 ExpansionLabel labeling = ExpansionLabel::vertex_label) {
  // Subtree sizes first (saturating) so the budget check precedes any allocation.
  const auto heights = dag_heights(dag.children);
  std::vector<NodeId> order(dag.num_nodes());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<NodeId>(i);
  std::sort(order.begin(), order.end(), [&](NodeId a, NodeId b) { return heights[a] < heights[b]; });
  constexpr std::uint64_t kCap = std::numeric_limits<std::uint64_t>::max() / 4;
  std::vector<std::uint64_t> size(dag.num_nodes(), 1);
  for (NodeId v : order) {
    std::uint64_t s = 1;
    for (const auto& c : dag.children[v]) {
      s += std::min<std::uint64_t>(kCap, size[c.node] * c.mult);
      s = std::min(s, kCap);
    }
    size[v] = s;
  }
  if (dag.num_nodes() == 0) return {};
  if (size[dag.root] > max_nodes) {
    throw BudgetError("tree expansion needs " + std::to_string(size[dag.root]) +
                      " nodes, budget is " + std::to_string(max_nodes));
  }

  RootedTree tree;
  auto label_of = [&](NodeId v) {
    return labeling == ExpansionLabel::origin ? Label{dag.nodes[v].origin} : dag.nodes[v].label;
  };
  struct Frame {
    NodeId dag_node;
    NodeId tree_node;
  };
  std::vector<Frame> stack;
  tree.root = tree.add_node(label_of(dag.root));
  stack.push_back({dag.root, tree.root});
  while (!stack.empty()) {
    Frame f = stack.back();
    stack.pop_back();
    for (const auto& c : dag.children[f.dag_node]) {
      for (std::uint32_t i = 0; i < c.mult; ++i) {
        NodeId t = tree.add_node(label_of(c.node));
        tree.add_child(f.tree_node, t);
        stack.push_back({c.node, t});
      }
    }
  }
  return tree;
}

// Rooted tree -> compact form (every tree node is its own DAG node). Used to
// feed explicit trees into the merge.
inline CompactTreeDag compact_from_tree(const RootedTree& t, std::int32_t graph_id = 0) {
  CompactTreeDag dag;
  dag.graph_id = graph_id;
  dag.root = t.root;
  dag.nodes.resize(t.size());
  dag.children.resize(t.size());
  std::vector<NodeId> stack{t.root};
  dag.nodes[t.root] = {t.root, 0, t.labels[t.root]};
  while (!stack.empty()) {
    NodeId v = stack.back();
    stack.pop_back();
    for (NodeId c : t.children[v]) {
      dag.nodes[c] = {c, dag.nodes[v].depth + 1, t.labels[c]};
      dag.height = std::max(dag.height, dag.nodes[c].depth);
      dag.children[v].push_back({c, 1});
      stack.push_back(c);
    }
  }
  return dag;
}

// Serializes in the DAG JSON schema (single root, tree index 0). Heights and
// codes are computed on the fly under the mu labeling with a fresh table.
inline nlohmann::json compact_dag_to_json(const CompactTreeDag& dag) {
  CanonTable table;
  auto labels = dag.mu_labels();
  auto canon = canonize_dag(labels, dag.children, table);
  nlohmann::json out;
  auto nodes = nlohmann::json::array();
  for (std::size_t i = 0; i < dag.num_nodes(); ++i) {
    nodes.push_back({{"id", i},
                     {"label", dag.nodes[i].label},
                     {"origin_graph", dag.graph_id},
                     {"origin_vertex", dag.nodes[i].origin},
                     {"height", canon.heights[i]},
                     {"code", canon.codes[i]}});
  }
  auto edges = nlohmann::json::array();
  for (std::size_t p = 0; p < dag.num_nodes(); ++p) {
    for (const auto& c : dag.children[p]) edges.push_back({c.node, p, c.mult});
  }
  out["nodes"] = std::move(nodes);
  out["edges"] = std::move(edges);
  out["roots"] = {{"0", dag.root}};
  return out;
}

}  // namespace ntgnn
