#pragma once

#include <cstdint>
#include <numeric>
#include <random>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "ntgnn/error.hpp"
#include "ntgnn/graph.hpp"

namespace ntgnn {

// Circulant skip-link graph: cycle 0-1-...-(n-1)-0 plus chords i -- (i+skip) mod n.
inline LabeledGraph generate_csl(std::size_t n, std::size_t skip,
                                 std::optional<std::int64_t> graph_class = std::nullopt) {
  if (n < 5) throw ArgumentError("CSL graphs need n >= 5");
  if (skip <= 1 || 2 * skip >= n) {
    throw ArgumentError("CSL skip must satisfy 1 < skip < n/2, got skip=" + std::to_string(skip) +
                        " for n=" + std::to_string(n));
  }
  std::vector<std::pair<VertexId, VertexId>> edges;
  for (std::size_t i = 0; i < n; ++i) {
    edges.emplace_back(static_cast<VertexId>(i), static_cast<VertexId>((i + 1) % n));
    edges.emplace_back(static_cast<VertexId>(i), static_cast<VertexId>((i + skip) % n));
  }
  return LabeledGraph(n, std::move(edges), true, {}, std::nullopt, graph_class);
}

enum class Counterexample { hexagon, two_triangles, fig7_g1, fig7_g2, fig1_graph };

// Distinguished vertices of the built-in figure graphs.
inline constexpr VertexId kFig7RedVertex = 0;  // same id in fig7-g1 and fig7-g2
inline constexpr VertexId kFig1Red = 0;        // upper left
inline constexpr VertexId kFig1Yellow = 3;     // lower right

inline Counterexample parse_counterexample(std::string_view name) {
  if (name == "hexagon") return Counterexample::hexagon;
  if (name == "two-triangles") return Counterexample::two_triangles;
  if (name == "fig7-g1") return Counterexample::fig7_g1;
  if (name == "fig7-g2") return Counterexample::fig7_g2;
  if (name == "fig1-graph") return Counterexample::fig1_graph;
  throw ArgumentError("unknown counterexample '" + std::string(name) + "'");
}

inline const char* to_string(Counterexample which) {
  switch (which) {
    case Counterexample::hexagon: return "hexagon";
    case Counterexample::two_triangles: return "two-triangles";
    case Counterexample::fig7_g1: return "fig7-g1";
    case Counterexample::fig7_g2: return "fig7-g2";
    case Counterexample::fig1_graph: return "fig1-graph";
  }
  return "?";
}

// Built-in small graphs used by the expressivity and influence analyses.
//
//   hexagon        C6
//   two-triangles  K3 + K3
//   fig7-g1        triangle {0,1,2} with pendant 3 on vertex 0
//   fig7-g2        square 0-1-2-3-0 with pendant 4 on vertex 0
//   fig1-graph     triangle {0,1,2} with pendant 3 on vertex 1; all four
//                  vertices carry distinct colors (labels 0..3)
//
// In fig7-g1/g2 the marked vertex 0 has identical 1-NTs of every height while
// its unfolding trees differ from height 4 on.
inline LabeledGraph generate_counterexample(Counterexample which) {
  using E = std::vector<std::pair<VertexId, VertexId>>;
  switch (which) {
    case Counterexample::hexagon:
      return LabeledGraph(6, E{{0, 1}, {1, 2}, {2, 3}, {3, 4}, {4, 5}, {5, 0}}, true);
    case Counterexample::two_triangles:
      return LabeledGraph(6, E{{0, 1}, {1, 2}, {2, 0}, {3, 4}, {4, 5}, {5, 3}}, true);
    case Counterexample::fig7_g1:
      return LabeledGraph(4, E{{0, 1}, {1, 2}, {2, 0}, {0, 3}}, true);
    case Counterexample::fig7_g2:
      return LabeledGraph(5, E{{0, 1}, {1, 2}, {2, 3}, {3, 0}, {0, 4}}, true);
    case Counterexample::fig1_graph:
      return LabeledGraph(4, E{{0, 1}, {0, 2}, {1, 2}, {1, 3}}, true, {0, 1, 2, 3});
  }
  throw ArgumentError("unknown counterexample");
}

// Uniform double in [0, 1) from the top 53 bits; stable across standard libraries.
inline double uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline std::size_t uniform_index(std::mt19937_64& rng, std::size_t bound) {
  return static_cast<std::size_t>(uniform01(rng) * static_cast<double>(bound));
}

// Erdos-Renyi G(n, p) with optional random labels in [0, num_labels).
inline LabeledGraph generate_gnp(std::size_t n, double p, std::mt19937_64& rng,
                                 std::size_t num_labels = 1) {
  std::vector<std::pair<VertexId, VertexId>> edges;
  for (std::size_t u = 0; u < n; ++u) {
    for (std::size_t v = u + 1; v < n; ++v) {
      if (uniform01(rng) < p) edges.emplace_back(static_cast<VertexId>(u), static_cast<VertexId>(v));
    }
  }
  std::vector<Label> labels(n, 0);
  if (num_labels > 1) {
    for (auto& l : labels) l = static_cast<Label>(uniform_index(rng, num_labels));
  }
  return LabeledGraph(n, std::move(edges), true, std::move(labels));
}

// Connected random graph: a random recursive spanning tree plus G(n, p) edges.
inline LabeledGraph generate_connected(std::size_t n, double p, std::mt19937_64& rng,
                                       std::size_t num_labels = 1) {
  std::vector<std::pair<VertexId, VertexId>> edges;
  std::vector<VertexId> order(n);
  std::iota(order.begin(), order.end(), 0);
  for (std::size_t i = n; i > 1; --i) std::swap(order[i - 1], order[uniform_index(rng, i)]);
  for (std::size_t i = 1; i < n; ++i) edges.emplace_back(order[uniform_index(rng, i)], order[i]);
  for (std::size_t u = 0; u < n; ++u) {
    for (std::size_t v = u + 1; v < n; ++v) {
      if (uniform01(rng) < p) edges.emplace_back(static_cast<VertexId>(u), static_cast<VertexId>(v));
    }
  }
  std::vector<Label> labels(n, 0);
  if (num_labels > 1) {
    for (auto& l : labels) l = static_cast<Label>(uniform_index(rng, num_labels));
  }
  return LabeledGraph(n, std::move(edges), true, std::move(labels));
}

// Applies the vertex permutation perm (v -> perm[v]) to g.
inline LabeledGraph permute_graph(const LabeledGraph& g, const std::vector<VertexId>& perm) {
  std::vector<std::pair<VertexId, VertexId>> edges;
  for (auto [u, v] : g.edges()) {
    if (!g.undirected() || u < v) edges.emplace_back(perm[u], perm[v]);
  }
  std::vector<Label> labels(g.num_vertices());
  for (std::size_t v = 0; v < g.num_vertices(); ++v) labels[perm[v]] = g.label(static_cast<VertexId>(v));
  std::optional<FeatureMatrix> features;
  if (g.features()) {
    features = FeatureMatrix{g.features()->dim, std::vector<double>(g.features()->values.size())};
    for (std::size_t v = 0; v < g.num_vertices(); ++v) {
      auto row = g.features()->row(v);
      std::copy(row.begin(), row.end(), features->values.begin() + perm[v] * features->dim);
    }
  }
  return LabeledGraph(g.num_vertices(), std::move(edges), g.undirected(),
                      g.has_discrete_labels() ? std::move(labels) : std::vector<Label>{},
                      std::move(features), g.graph_class());
}

inline std::vector<VertexId> random_permutation(std::size_t n, std::mt19937_64& rng) {
  std::vector<VertexId> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  for (std::size_t i = n; i > 1; --i) std::swap(perm[i - 1], perm[uniform_index(rng, i)]);
  return perm;
}

}  // namespace ntgnn
