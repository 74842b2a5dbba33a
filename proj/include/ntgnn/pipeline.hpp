#pragma once

#include <algorithm>
#include <cstdint>
#include <exception>
#include <filesystem>
#include <fstream>
#include <optional>
#include <thread>
#include <vector>

#include <json.hpp>

#include "ntgnn/dag_mlp.hpp"
#include "ntgnn/error.hpp"
#include "ntgnn/graph.hpp"
#include "ntgnn/matrices.hpp"
#include "ntgnn/merge_dag.hpp"
#include "ntgnn/tree_builder.hpp"

namespace ntgnn {

struct TreeIndex {
  std::int32_t graph = 0;
  VertexId vertex = 0;
  std::uint32_t height = 0;

  friend bool operator==(const TreeIndex&, const TreeIndex&) = default;
};

struct PreprocessOptions {
  Redundancy k = 0;
  std::uint32_t height = 1;
  Labeling labeling = Labeling::mu;
  // Build trees of every height 0..height (needed by the combine-heights
  // readout) or of the final height only.
  bool all_heights = true;
  // Attach same-origin predecessor links (phi-merged unfolding trees only).
  bool self_links = false;
  FeatureMode features = FeatureMode::one_hot_label;
  unsigned threads = 0;  // 0 = hardware concurrency
};

struct Preprocessed {
  MergeDag dag;
  std::vector<TreeIndex> index;  // tree index -> (graph, vertex, height)
  ReadoutPlan plan;
  LayeredMatrices matrices;
};

inline unsigned resolve_threads(unsigned requested) {
  if (requested != 0) return requested;
  return std::max(1u, std::thread::hardware_concurrency());
}

// Runs body(i) for i in [0, count) on up to `threads` workers. Each index is
// processed by exactly one worker, so per-index outputs are independent of
// the thread count. The first exception is rethrown.
template <typename F>
void parallel_for(std::size_t count, unsigned threads, F&& body) {
  threads = static_cast<unsigned>(std::min<std::size_t>(resolve_threads(threads), std::max<std::size_t>(count, 1)));
  if (threads <= 1) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::vector<std::exception_ptr> errors(threads);
  std::vector<std::thread> workers;
  for (unsigned t = 0; t < threads; ++t) {
    workers.emplace_back([&, t] {
      try {
        for (std::size_t i = t; i < count; i += threads) body(i);
      } catch (...) {
        errors[t] = std::current_exception();
      }
    });
  }
  for (auto& w : workers) w.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

inline std::vector<std::uint32_t> tree_heights(const PreprocessOptions& opt) {
  std::vector<std::uint32_t> hs;
  for (std::uint32_t h = opt.all_heights ? 0 : opt.height; h <= opt.height; ++h) hs.push_back(h);
  return hs;
}

// Trees of one graph in (height, vertex) order.
inline std::vector<CompactTreeDag> build_graph_trees(const LabeledGraph& g, std::int32_t graph_id,
                                                     const PreprocessOptions& opt) {
  std::vector<CompactTreeDag> trees;
  for (std::uint32_t h : tree_heights(opt)) {
    for (std::size_t v = 0; v < g.num_vertices(); ++v) {
      trees.push_back(build_knt_dag(g, static_cast<VertexId>(v), h, opt.k, graph_id));
    }
  }
  return trees;
}

inline ReadoutPlan make_readout_plan(const MergeDag& dag, const std::vector<TreeIndex>& index, std::size_t num_graphs,
                                     std::uint32_t max_height) {
  ReadoutPlan plan;
  plan.max_height = max_height;
  plan.roots.assign(num_graphs, std::vector<std::vector<NodeId>>(max_height + 1));
  plan.height_present.assign(max_height + 1, false);
  for (std::size_t t = 0; t < index.size(); ++t) {
    plan.roots[index[t].graph][index[t].height].push_back(dag.xi(t));
    plan.height_present[index[t].height] = true;
  }
  return plan;
}

// Builds all trees, merges them, computes layers and exports the layered
// matrices. Under phi every graph is merged on its own (vertex identity is
// only meaningful within a graph) and the per-graph DAGs are concatenated;
// under mu one shared merge identifies isomorphic subtrees across graphs.
inline Preprocessed preprocess(const GraphCollection& coll, const PreprocessOptions& opt) {
  const std::size_t num_graphs = coll.graphs.size();
  std::vector<std::vector<CompactTreeDag>> trees(num_graphs);
  std::vector<MergeDag> per_graph(opt.labeling == Labeling::phi ? num_graphs : 0, MergeDag(Labeling::phi));
  parallel_for(num_graphs, opt.threads, [&](std::size_t gi) {
    trees[gi] = build_graph_trees(coll.graphs[gi], static_cast<std::int32_t>(gi), opt);
    if (opt.labeling == Labeling::phi) {
      for (const auto& t : trees[gi]) per_graph[gi].add_tree(t);
      trees[gi].clear();
    }
  });

  Preprocessed out{MergeDag(opt.labeling), {}, {}, {}};
  if (opt.labeling == Labeling::phi) {
    for (auto& d : per_graph) out.dag.append_disjoint(d);
  } else {
    for (auto& ts : trees) {
      for (const auto& t : ts) out.dag.add_tree(t);
    }
  }
  for (std::size_t gi = 0; gi < num_graphs; ++gi) {
    for (std::uint32_t h : tree_heights(opt)) {
      for (std::size_t v = 0; v < coll.graphs[gi].num_vertices(); ++v) {
        out.index.push_back({static_cast<std::int32_t>(gi), static_cast<VertexId>(v), h});
      }
    }
  }
  out.dag.compute_layers();
  out.plan = make_readout_plan(out.dag, out.index, num_graphs, opt.height);
  out.matrices = export_matrices(out.dag, coll, opt.features);
  if (opt.self_links) out.matrices.self_links = self_links_by_origin(out.dag);
  return out;
}

// plan.json: readout roots per (graph, height) plus optional class targets.
inline nlohmann::json plan_to_json(const ReadoutPlan& plan, const std::vector<std::optional<std::int64_t>>& targets) {
  nlohmann::json j;
  j["max_height"] = plan.max_height;
  j["height_present"] = plan.height_present;
  j["roots"] = plan.roots;
  auto t = nlohmann::json::array();
  for (const auto& c : targets) t.push_back(c ? nlohmann::json(*c) : nlohmann::json());
  j["targets"] = std::move(t);
  return j;
}

struct PlanFile {
  ReadoutPlan plan;
  std::vector<std::optional<std::int64_t>> targets;
};

inline PlanFile read_plan(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  try {
    const auto j = nlohmann::json::parse(in);
    PlanFile f;
    f.plan.max_height = j.at("max_height").get<std::size_t>();
    f.plan.height_present = j.at("height_present").get<std::vector<bool>>();
    f.plan.roots = j.at("roots").get<std::vector<std::vector<std::vector<NodeId>>>>();
    for (const auto& t : j.at("targets")) {
      f.targets.push_back(t.is_null() ? std::nullopt : std::optional<std::int64_t>(t.get<std::int64_t>()));
    }
    if (f.targets.size() != f.plan.num_graphs() || f.plan.height_present.size() != f.plan.max_height + 1) {
      throw DataError(path.string() + " is inconsistent");
    }
    return f;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

}  // namespace ntgnn
