#pragma once

#include <algorithm>
#include <cstdint>
#include <limits>
#include <optional>
#include <queue>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "ntgnn/error.hpp"

namespace ntgnn {

using VertexId = std::int32_t;
using Label = std::int64_t;

inline constexpr std::int32_t kUnreachable = std::numeric_limits<std::int32_t>::max();

// Dense per-vertex feature rows of a uniform dimension.
struct FeatureMatrix {
  std::size_t dim = 0;
  std::vector<double> values;  // row-major, num_rows * dim

  std::size_t rows() const { return dim == 0 ? 0 : values.size() / dim; }
  std::span<const double> row(std::size_t r) const {
    return {values.data() + r * dim, dim};
  }
};

// Input graph G = (V, E, mu). Edges are directed records (u, v); an undirected
// graph stores both directions. Neighborhoods are in-neighborhoods
// N(v) = {u | uv in E}, matching the orientation of in-trees.
//
// Immutable after construction.
class LabeledGraph {
 public:
  LabeledGraph() = default;

  // Validates every invariant and throws BoundsError / DimensionError /
  // ArgumentError on violation. For undirected graphs each listed pair is
  // inserted in both directions; duplicate records collapse.
  LabeledGraph(std::size_t n, std::vector<std::pair<VertexId, VertexId>> edges,
               bool undirected, std::vector<Label> labels = {},
               std::optional<FeatureMatrix> features = std::nullopt,
               std::optional<std::int64_t> graph_class = std::nullopt)
      : n_(n),
        undirected_(undirected),
        labels_(std::move(labels)),
        features_(std::move(features)),
        graph_class_(graph_class) {
    if (labels_.empty()) {
      labels_.assign(n_, 0);
      discrete_labels_ = !features_.has_value();
    } else if (labels_.size() != n_) {
      throw DimensionError("expected " + std::to_string(n_) + " vertex labels, got " +
                           std::to_string(labels_.size()));
    }
    for (Label l : labels_) {
      if (l < 0) throw ArgumentError("vertex labels must be non-negative");
    }
    if (features_) {
      if (features_->dim == 0) throw DimensionError("feature dimension must be >= 1");
      if (features_->values.size() != n_ * features_->dim) {
        throw DimensionError("feature matrix does not have n rows of dimension " +
                             std::to_string(features_->dim));
      }
    }

    std::vector<std::pair<VertexId, VertexId>> records;
    records.reserve(undirected_ ? 2 * edges.size() : edges.size());
    for (auto [u, v] : edges) {
      if (u < 0 || v < 0 || static_cast<std::size_t>(u) >= n_ ||
          static_cast<std::size_t>(v) >= n_) {
        throw BoundsError("edge (" + std::to_string(u) + ", " + std::to_string(v) +
                          ") has an endpoint outside [0, " + std::to_string(n_) + ")");
      }
      if (undirected_ && u == v) {
        throw ArgumentError("self-loop on vertex " + std::to_string(u) +
                            " in an undirected graph");
      }
      records.emplace_back(u, v);
      if (undirected_) records.emplace_back(v, u);
    }
    std::sort(records.begin(), records.end());
    records.erase(std::unique(records.begin(), records.end()), records.end());
    edges_ = std::move(records);

    // CSR over in-neighbors, sorted per vertex.
    in_offsets_.assign(n_ + 1, 0);
    for (auto [u, v] : edges_) ++in_offsets_[v + 1];
    for (std::size_t i = 0; i < n_; ++i) in_offsets_[i + 1] += in_offsets_[i];
    in_neighbors_.resize(edges_.size());
    std::vector<std::size_t> fill(in_offsets_.begin(), in_offsets_.end() - 1);
    for (auto [u, v] : edges_) in_neighbors_[fill[v]++] = u;
    for (std::size_t v = 0; v < n_; ++v) {
      std::sort(in_neighbors_.begin() + in_offsets_[v], in_neighbors_.begin() + in_offsets_[v + 1]);
    }
  }

  std::size_t num_vertices() const { return n_; }
  // Number of directed edge records (2 per undirected edge).
  std::size_t num_edge_records() const { return edges_.size(); }
  bool undirected() const { return undirected_; }

  const std::vector<std::pair<VertexId, VertexId>>& edges() const { return edges_; }

  std::span<const VertexId> neighbors(VertexId v) const {
    return {in_neighbors_.data() + in_offsets_[v], in_offsets_[v + 1] - in_offsets_[v]};
  }
  std::size_t degree(VertexId v) const { return in_offsets_[v + 1] - in_offsets_[v]; }

  bool has_edge(VertexId u, VertexId v) const {
    auto nb = neighbors(v);
    return std::binary_search(nb.begin(), nb.end(), u);
  }

  const std::vector<Label>& labels() const { return labels_; }
  Label label(VertexId v) const { return labels_[v]; }
  const std::optional<FeatureMatrix>& features() const { return features_; }
  std::optional<std::int64_t> graph_class() const { return graph_class_; }

  // False when the graph only carries continuous features; such labels are
  // not valid input for interning-based canonization.
  bool has_discrete_labels() const { return discrete_labels_; }

 private:
  std::size_t n_ = 0;
  bool undirected_ = true;
  std::vector<std::pair<VertexId, VertexId>> edges_;
  std::vector<std::size_t> in_offsets_{0};
  std::vector<VertexId> in_neighbors_;
  std::vector<Label> labels_;
  std::optional<FeatureMatrix> features_;
  std::optional<std::int64_t> graph_class_;
  bool discrete_labels_ = true;
};

struct GraphCollection {
  std::vector<LabeledGraph> graphs;
  std::string name;
  // Distinct vertex labels across the collection; labels are 0..label_dimension-1.
  std::size_t label_dimension = 1;
};

// Re-indexes vertex labels densely (ascending original id) across the whole
// collection and updates label_dimension. Graphs that carry only real
// features keep their placeholder labels and do not count.
inline void reindex_labels(GraphCollection& coll) {
  std::vector<Label> distinct;
  for (const auto& g : coll.graphs) {
    if (g.has_discrete_labels()) distinct.insert(distinct.end(), g.labels().begin(), g.labels().end());
  }
  std::sort(distinct.begin(), distinct.end());
  distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
  bool identity = true;
  for (std::size_t i = 0; i < distinct.size(); ++i) identity &= distinct[i] == static_cast<Label>(i);
  coll.label_dimension = std::max<std::size_t>(1, distinct.size());
  if (identity) return;
  for (auto& g : coll.graphs) {
    if (!g.has_discrete_labels()) continue;
    std::vector<Label> labels(g.labels());
    for (auto& l : labels) {
      l = std::lower_bound(distinct.begin(), distinct.end(), l) - distinct.begin();
    }
    std::vector<std::pair<VertexId, VertexId>> edges;
    for (auto [u, v] : g.edges()) {
      if (!g.undirected() || u < v) edges.emplace_back(u, v);
    }
    g = LabeledGraph(g.num_vertices(), std::move(edges), g.undirected(), std::move(labels), g.features(),
                     g.graph_class());
  }
}

// Single-source BFS distances along message direction: dist[w] is the length
// of the shortest walk w -> ... -> source, i.e. the minimum depth at which w
// occurs in the unfolding tree of source.
inline std::vector<std::int32_t> bfs_distances(const LabeledGraph& g, VertexId source) {
  std::vector<std::int32_t> dist(g.num_vertices(), kUnreachable);
  std::queue<VertexId> queue;
  dist[source] = 0;
  queue.push(source);
  while (!queue.empty()) {
    VertexId w = queue.front();
    queue.pop();
    for (VertexId u : g.neighbors(w)) {
      if (dist[u] == kUnreachable) {
        dist[u] = dist[w] + 1;
        queue.push(u);
      }
    }
  }
  return dist;
}

inline std::size_t count_components(const LabeledGraph& g) {
  std::vector<int> parent(g.num_vertices());
  for (std::size_t i = 0; i < parent.size(); ++i) parent[i] = static_cast<int>(i);
  auto find = [&](int x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  std::size_t components = g.num_vertices();
  for (auto [u, v] : g.edges()) {
    int a = find(u), b = find(v);
    if (a != b) {
      parent[a] = b;
      --components;
    }
  }
  return components;
}

}  // namespace ntgnn
