#pragma once

#include <algorithm>
#include <cstdint>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "ntgnn/canon.hpp"
#include "ntgnn/error.hpp"
#include "ntgnn/graph.hpp"
#include "ntgnn/merge_dag.hpp"
#include "ntgnn/tree_builder.hpp"
#include "ntgnn/wl.hpp"

namespace ntgnn {

using BigInt = boost::multiprecision::cpp_int;
using Rational = boost::multiprecision::cpp_rational;

enum class InfluenceMethod { mpnn_hat_adjacency, unfolding_tree, nt0, nt1 };

inline InfluenceMethod parse_influence_method(std::string_view s) {
  if (s == "mpnn-hat-adjacency") return InfluenceMethod::mpnn_hat_adjacency;
  if (s == "unfolding-tree") return InfluenceMethod::unfolding_tree;
  if (s == "0-nt") return InfluenceMethod::nt0;
  if (s == "1-nt") return InfluenceMethod::nt1;
  throw ArgumentError("unknown influence method '" + std::string(s) + "'");
}

inline const char* to_string(InfluenceMethod m) {
  switch (m) {
    case InfluenceMethod::mpnn_hat_adjacency: return "mpnn-hat-adjacency";
    case InfluenceMethod::unfolding_tree: return "unfolding-tree";
    case InfluenceMethod::nt0: return "0-nt";
    case InfluenceMethod::nt1: return "1-nt";
  }
  return "?";
}

inline constexpr InfluenceMethod kAllInfluenceMethods[] = {
    InfluenceMethod::mpnn_hat_adjacency, InfluenceMethod::unfolding_tree, InfluenceMethod::nt0, InfluenceMethod::nt1};

struct InfluenceReport {
  VertexId u = 0;  // receiving vertex (tree root)
  VertexId v = 0;  // influencing vertex
  std::uint32_t k = 0;
  InfluenceMethod method = InfluenceMethod::unfolding_tree;
  BigInt numerator = 0;
  BigInt denominator = 1;

  Rational value() const { return Rational(numerator, denominator); }
};

// Occurrences of every origin vertex in the tree expansion of a compact DAG,
// by top-down path counting (nodes are stored parents-before-children).
inline std::vector<BigInt> expansion_counts(const CompactTreeDag& dag) {
  std::vector<BigInt> count(dag.num_nodes(), 0);
  if (dag.num_nodes() == 0) return count;
  count[dag.root] = 1;
  for (std::size_t p = 0; p < dag.num_nodes(); ++p) {
    if (count[p] == 0) continue;
    for (const auto& c : dag.children[p]) count[c.node] += count[p] * c.mult;
  }
  return count;
}

// Relative influence of v on u at depth k. The adjacency method uses row u
// of (A + I)^k; the tree methods count occurrences of v among all nodes of
// u's tree of height k.
inline InfluenceReport relative_influence(const LabeledGraph& g, VertexId u, VertexId v, std::uint32_t k,
                                          InfluenceMethod method) {
  const auto n = static_cast<VertexId>(g.num_vertices());
  if (u < 0 || u >= n || v < 0 || v >= n) throw ArgumentError("influence vertices out of range");
  InfluenceReport r{u, v, k, method, 0, 0};
  if (method == InfluenceMethod::mpnn_hat_adjacency) {
    std::vector<BigInt> row(g.num_vertices(), 0), next(g.num_vertices());
    row[u] = 1;
    for (std::uint32_t step = 0; step < k; ++step) {
      std::fill(next.begin(), next.end(), BigInt(0));
      for (VertexId x = 0; x < n; ++x) {
        if (row[x] == 0) continue;
        next[x] += row[x];
        for (VertexId w : g.neighbors(x)) next[w] += row[x];
      }
      std::swap(row, next);
    }
    r.numerator = row[v];
    for (const auto& c : row) r.denominator += c;
    return r;
  }
  Redundancy red = kUnfolding;
  if (method == InfluenceMethod::nt0) red = 0;
  if (method == InfluenceMethod::nt1) red = 1;
  const auto dag = build_knt_dag(g, u, k, red);
  const auto count = expansion_counts(dag);
  for (std::size_t i = 0; i < dag.num_nodes(); ++i) {
    r.denominator += count[i];
    if (dag.nodes[i].origin == v) r.numerator += count[i];
  }
  return r;
}

struct OrderingResult {
  Rational unfolding;
  Rational nt1;
  Rational nt0;
  bool holds = false;
};

// unfolding <= 1-NT <= 0-NT for a pair at shortest-path distance exactly k.
inline OrderingResult influence_ordering(const LabeledGraph& g, VertexId u, VertexId v, std::uint32_t k) {
  if (u < 0 || v < 0 || static_cast<std::size_t>(u) >= g.num_vertices() ||
      static_cast<std::size_t>(v) >= g.num_vertices()) {
    throw ArgumentError("influence vertices out of range");
  }
  const auto dist = bfs_distances(g, u);
  if (dist[v] != static_cast<std::int32_t>(k)) {
    throw PreconditionError("ordering check needs dist(u, v) = k (dist is " +
                            (dist[v] == kUnreachable ? std::string("unreachable") : std::to_string(dist[v])) +
                            ", k = " + std::to_string(k) + ")");
  }
  OrderingResult out;
  out.unfolding = relative_influence(g, u, v, k, InfluenceMethod::unfolding_tree).value();
  out.nt1 = relative_influence(g, u, v, k, InfluenceMethod::nt1).value();
  out.nt0 = relative_influence(g, u, v, k, InfluenceMethod::nt0).value();
  out.holds = out.unfolding <= out.nt1 && out.nt1 <= out.nt0;
  return out;
}

inline bool influence_ordering_check(const LabeledGraph& g, VertexId u, VertexId v, std::uint32_t k) {
  return influence_ordering(g, u, v, k).holds;
}

inline std::string redundancy_to_string(Redundancy k) { return k ? std::to_string(*k) : std::string("inf"); }

inline Redundancy parse_redundancy(std::string_view s) {
  if (s == "inf" || s == "unfolding") return kUnfolding;
  try {
    std::size_t pos = 0;
    const long long value = std::stoll(std::string(s), &pos);
    if (pos != s.size() || value < 0 || value > 1'000'000) throw std::invalid_argument("range");
    return static_cast<std::uint32_t>(value);
  } catch (const std::exception&) {
    throw ArgumentError("k must be a non-negative integer or 'inf', got '" + std::string(s) + "'");
  }
}

// Graph-level k-NT signatures of several graphs under one canonization
// table: the sorted root codes of the height-h trees of all vertices.
inline std::vector<std::vector<Code>> knt_signatures(std::span<const LabeledGraph* const> graphs,
                                                     std::uint32_t height, Redundancy k) {
  MergeDag merged(Labeling::mu);
  std::vector<std::vector<std::size_t>> groups(graphs.size());
  for (std::size_t gi = 0; gi < graphs.size(); ++gi) {
    for (std::size_t v = 0; v < graphs[gi]->num_vertices(); ++v) {
      groups[gi].push_back(merged.add_tree(
          build_knt_dag(*graphs[gi], static_cast<VertexId>(v), height, k, static_cast<std::int32_t>(gi))));
    }
  }
  return multiset_signature(merged, groups);
}

// Root codes of two vertices' trees under one table.
inline std::pair<Code, Code> knt_root_codes(const LabeledGraph& g1, VertexId v1, const LabeledGraph& g2,
                                            VertexId v2, std::uint32_t height, Redundancy k) {
  CanonTable table;
  auto code = [&](const LabeledGraph& g, VertexId v) {
    const auto dag = build_knt_dag(g, v, height, k);
    const auto labels = dag.mu_labels();
    return canonize_dag(labels, dag.children, table).codes[dag.root];
  };
  const Code a = code(g1, v1);
  return {a, code(g2, v2)};
}

// WL color histograms of several graphs after the given number of
// iterations, comparable across graphs.
inline std::vector<std::vector<Color>> wl_signatures(std::span<const LabeledGraph* const> graphs,
                                                     std::size_t iterations) {
  WlRefiner refiner;
  std::vector<std::vector<Color>> out;
  for (const auto* g : graphs) out.push_back(color_histogram(refiner.refine(*g, iterations).back()));
  return out;
}

struct DistinguishabilityRow {
  std::size_t pair = 0;
  std::uint32_t height = 0;
  Redundancy k = kUnfolding;
  bool wl = false;
  bool knt = false;
};

// For every pair, height and k: whether WL colors (after `height`
// iterations) and k-NT signatures (trees of height `height`) tell the two
// graphs apart.
inline std::vector<DistinguishabilityRow> expressivity_report(
    const std::vector<std::pair<LabeledGraph, LabeledGraph>>& pairs, const std::vector<std::uint32_t>& heights,
    const std::vector<Redundancy>& ks) {
  std::vector<DistinguishabilityRow> rows;
  for (std::size_t p = 0; p < pairs.size(); ++p) {
    const LabeledGraph* gs[] = {&pairs[p].first, &pairs[p].second};
    for (std::uint32_t h : heights) {
      const auto wl = wl_signatures(gs, h);
      for (Redundancy k : ks) {
        const auto sig = knt_signatures(gs, h, k);
        rows.push_back({p, h, k, wl[0] != wl[1], sig[0] != sig[1]});
      }
    }
  }
  return rows;
}

struct SizeAuditRow {
  std::size_t graph = 0;
  std::size_t n = 0;
  std::size_t m = 0;  // directed edge records
  std::uint32_t k = 0;
  std::size_t tree_edges = 0;  // max over vertices
  std::size_t merge_nodes = 0;
  std::size_t merge_edges = 0;

  double tree_ratio() const { return m == 0 ? 0.0 : static_cast<double>(tree_edges) / (static_cast<double>(m) * (k + 1)); }
  double merge_ratio() const {
    return m == 0 || n == 0 ? 0.0
                            : static_cast<double>(merge_edges) / (static_cast<double>(n) * static_cast<double>(m) * (k + 1));
  }
};

struct SizeAudit {
  std::vector<SizeAuditRow> rows;
  double bound_constant = 1.0;  // ratios must stay <= this
  double max_tree_ratio = 0.0;
  double max_merge_ratio = 0.0;

  bool within_bounds() const { return max_tree_ratio <= bound_constant && max_merge_ratio <= bound_constant; }
};

// Per graph: largest per-vertex k-NT DAG (edges), and the phi merge of all
// vertices' k-NTs of the given height.
inline SizeAudit size_audit(const GraphCollection& coll, std::uint32_t k, std::uint32_t height) {
  SizeAudit audit;
  for (std::size_t gi = 0; gi < coll.graphs.size(); ++gi) {
    const auto& g = coll.graphs[gi];
    SizeAuditRow row{gi, g.num_vertices(), g.num_edge_records(), k, 0, 0, 0};
    MergeDag merged(Labeling::phi);
    for (std::size_t v = 0; v < g.num_vertices(); ++v) {
      const auto dag = build_knt_dag(g, static_cast<VertexId>(v), height, k, static_cast<std::int32_t>(gi));
      row.tree_edges = std::max(row.tree_edges, dag.num_edges());
      merged.add_tree(dag);
    }
    row.merge_nodes = merged.num_nodes();
    row.merge_edges = merged.num_edges();
    audit.max_tree_ratio = std::max(audit.max_tree_ratio, row.tree_ratio());
    audit.max_merge_ratio = std::max(audit.max_merge_ratio, row.merge_ratio());
    audit.rows.push_back(row);
  }
  return audit;
}

inline void write_influence_csv(const std::vector<InfluenceReport>& reports, std::ostream& out) {
  out << "u,v,k,method,num,den\n";
  for (const auto& r : reports) {
    out << r.u << ',' << r.v << ',' << r.k << ',' << to_string(r.method) << ',' << r.numerator << ','
        << r.denominator << '\n';
  }
}

inline void write_distinguishability_csv(const std::vector<DistinguishabilityRow>& rows, std::ostream& out) {
  out << "pair,height,k,wl,knt\n";
  for (const auto& r : rows) {
    out << r.pair << ',' << r.height << ',' << redundancy_to_string(r.k) << ',' << (r.wl ? 1 : 0) << ','
        << (r.knt ? 1 : 0) << '\n';
  }
}

inline void write_size_audit_csv(const SizeAudit& audit, std::ostream& out) {
  out << "graph,n,m,k,tree_edges,merge_nodes,merge_edges\n";
  for (const auto& r : audit.rows) {
    out << r.graph << ',' << r.n << ',' << r.m << ',' << r.k << ',' << r.tree_edges << ',' << r.merge_nodes << ','
        << r.merge_edges << '\n';
  }
}

}  // namespace ntgnn
