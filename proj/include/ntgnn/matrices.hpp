#pragma once

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

#include <json.hpp>

#include "ntgnn/error.hpp"
#include "ntgnn/graph.hpp"
#include "ntgnn/merge_dag.hpp"

namespace ntgnn {

// Sparse integer matrix in coordinate form, entries sorted by (row, col).
struct CooMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<std::int32_t> row;
  std::vector<std::int32_t> col;
  std::vector<std::uint32_t> value;

  std::size_t nnz() const { return value.size(); }

  void sort_entries() {
    std::vector<std::size_t> idx(nnz());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
      return std::tie(row[a], col[a]) < std::tie(row[b], col[b]);
    });
    CooMatrix sorted{rows, cols, {}, {}, {}};
    for (std::size_t i : idx) {
      sorted.row.push_back(row[i]);
      sorted.col.push_back(col[i]);
      sorted.value.push_back(value[i]);
    }
    *this = std::move(sorted);
  }

  friend bool operator==(const CooMatrix&, const CooMatrix&) = default;
};

enum class FeatureMode { one_hot_label, raw_features };

inline FeatureMode parse_feature_mode(std::string_view name) {
  if (name == "one-hot-label" || name == "one-hot") return FeatureMode::one_hot_label;
  if (name == "raw-features" || name == "raw") return FeatureMode::raw_features;
  throw ArgumentError("unknown feature mode '" + std::string(name) + "'");
}

// Layered sparse form of a merge DAG consumed by the DAG-MLP:
//   edge_layers[i]  E_i, entry (parent, child) = multiplicity, i = 1..H
//                   (edge_layers[0] is empty; leaves have no incoming edges)
//   layer_rows[i]   support of the diagonal selector L_i
//   features        one row per DAG node
//   root_rows       xi, one row index per tree
//   self_links      optional same-origin predecessor row per node (-1 if none)
struct LayeredMatrices {
  std::size_t num_nodes = 0;
  std::size_t height = 0;
  std::vector<CooMatrix> edge_layers;
  std::vector<std::vector<NodeId>> layer_rows;
  FeatureMatrix features;
  std::vector<NodeId> root_rows;
  std::vector<NodeId> self_links;

  // Diagonal 0/1 selector of layer i as a sparse matrix.
  CooMatrix layer_selector(std::size_t i) const {
    CooMatrix sel{num_nodes, num_nodes, {}, {}, {}};
    for (NodeId v : layer_rows.at(i)) {
      sel.row.push_back(v);
      sel.col.push_back(v);
      sel.value.push_back(1);
    }
    sel.sort_entries();
    return sel;
  }
};

inline LayeredMatrices export_matrices(const MergeDag& d, const GraphCollection& coll, FeatureMode mode) {
  if (!d.layers_computed()) throw ArgumentError("export_matrices needs computed layers");
  LayeredMatrices m;
  m.num_nodes = d.num_nodes();
  m.height = d.height();
  m.layer_rows = d.layers();
  m.root_rows = d.xi();
  m.edge_layers.resize(m.layer_rows.size());
  for (std::size_t i = 0; i < m.edge_layers.size(); ++i) {
    auto& e = m.edge_layers[i];
    e.rows = e.cols = m.num_nodes;
    for (const auto& edge : d.edge_layers()[i]) {
      e.row.push_back(edge.parent);
      e.col.push_back(edge.child);
      e.value.push_back(edge.mult);
    }
    e.sort_entries();
  }

  if (mode == FeatureMode::one_hot_label) {
    m.features.dim = std::max<std::size_t>(1, coll.label_dimension);
    m.features.values.assign(m.num_nodes * m.features.dim, 0.0);
    for (std::size_t v = 0; v < m.num_nodes; ++v) {
      const Label l = d.node(static_cast<NodeId>(v)).attr_label;
      if (l < 0 || static_cast<std::size_t>(l) >= m.features.dim) {
        throw DimensionError("label " + std::to_string(l) + " exceeds the collection label dimension");
      }
      m.features.values[v * m.features.dim + l] = 1.0;
    }
  } else {
    if (d.labeling() == Labeling::mu) {
      throw ArgumentError("raw-features export needs labeling=phi (mu nodes stand for several vertices)");
    }
    for (std::size_t v = 0; v < m.num_nodes; ++v) {
      const auto& n = d.node(static_cast<NodeId>(v));
      if (n.origin_graph < 0 || static_cast<std::size_t>(n.origin_graph) >= coll.graphs.size()) {
        throw ArgumentError("node refers to a graph outside the collection");
      }
      const auto& f = coll.graphs[n.origin_graph].features();
      if (!f) throw ArgumentError("raw-features export on a graph without features");
      if (m.features.dim == 0) m.features.dim = f->dim;
      if (f->dim != m.features.dim) throw DimensionError("feature dimension differs between graphs");
      auto row = f->row(n.origin_vertex);
      m.features.values.insert(m.features.values.end(), row.begin(), row.end());
    }
  }
  return m;
}

// Matrix files: manifest.json, features.txt (one row per node), roots.txt
// (one row index per tree), layers.txt (node heights) and
// edges_<i>.coo with one "row col value" triplet per line.
inline void write_matrices(const LayeredMatrices& m, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  nlohmann::json manifest;
  manifest["format"] = "ntgnn-layered-coo";
  manifest["version"] = 1;
  manifest["height"] = m.height;
  manifest["num_nodes"] = m.num_nodes;
  manifest["feature_dim"] = m.features.dim;
  manifest["num_trees"] = m.root_rows.size();
  auto nnz = nlohmann::json::array();
  for (const auto& e : m.edge_layers) nnz.push_back(e.nnz());
  manifest["layer_nnz"] = std::move(nnz);
  manifest["has_self_links"] = !m.self_links.empty();
  std::ofstream(dir / "matrices.json") << manifest.dump(2) << '\n';

  {
    std::ofstream out(dir / "features.txt");
    out.precision(17);
    for (std::size_t r = 0; r < m.num_nodes; ++r) {
      auto row = m.features.row(r);
      for (std::size_t j = 0; j < row.size(); ++j) out << (j ? " " : "") << row[j];
      out << '\n';
    }
  }
  {
    std::ofstream out(dir / "roots.txt");
    for (NodeId r : m.root_rows) out << r << '\n';
  }
  {
    std::vector<std::size_t> height(m.num_nodes, 0);
    for (std::size_t i = 0; i < m.layer_rows.size(); ++i) {
      for (NodeId v : m.layer_rows[i]) height[v] = i;
    }
    std::ofstream out(dir / "layers.txt");
    for (std::size_t v = 0; v < m.num_nodes; ++v) {
      out << height[v];
      if (!m.self_links.empty()) out << ' ' << m.self_links[v];
      out << '\n';
    }
  }
  for (std::size_t i = 1; i < m.edge_layers.size(); ++i) {
    std::ofstream out(dir / ("edges_" + std::to_string(i) + ".coo"));
    const auto& e = m.edge_layers[i];
    for (std::size_t k = 0; k < e.nnz(); ++k) out << e.row[k] << ' ' << e.col[k] << ' ' << e.value[k] << '\n';
  }
}

inline LayeredMatrices read_matrices(const std::filesystem::path& dir) {
  auto open = [&](const std::string& name) {
    std::ifstream in(dir / name);
    if (!in) throw DataError("cannot open " + (dir / name).string());
    return in;
  };
  nlohmann::json manifest;
  try {
    auto in = open("matrices.json");
    manifest = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("matrices.json: ") + e.what());
  }
  LayeredMatrices m;
  m.num_nodes = manifest.at("num_nodes").get<std::size_t>();
  m.height = manifest.at("height").get<std::size_t>();
  m.features.dim = manifest.at("feature_dim").get<std::size_t>();
  const bool self_links = manifest.value("has_self_links", false);

  {
    auto in = open("features.txt");
    double x;
    while (in >> x) m.features.values.push_back(x);
    if (m.features.values.size() != m.num_nodes * m.features.dim) throw DimensionError("features.txt has the wrong size");
  }
  {
    auto in = open("roots.txt");
    NodeId r;
    while (in >> r) m.root_rows.push_back(r);
  }
  {
    auto in = open("layers.txt");
    m.layer_rows.assign(m.height + 1, {});
    if (self_links) m.self_links.resize(m.num_nodes);
    for (std::size_t v = 0; v < m.num_nodes; ++v) {
      std::size_t h;
      if (!(in >> h) || h > m.height) throw DataError("layers.txt is malformed");
      m.layer_rows[h].push_back(static_cast<NodeId>(v));
      if (self_links && !(in >> m.self_links[v])) throw DataError("layers.txt is missing self links");
    }
  }
  m.edge_layers.resize(m.height + 1);
  for (auto& e : m.edge_layers) e.rows = e.cols = m.num_nodes;
  for (std::size_t i = 1; i <= m.height; ++i) {
    auto in = open("edges_" + std::to_string(i) + ".coo");
    auto& e = m.edge_layers[i];
    std::int32_t r, c;
    std::uint32_t val;
    while (in >> r >> c >> val) {
      if (r < 0 || c < 0 || static_cast<std::size_t>(r) >= m.num_nodes || static_cast<std::size_t>(c) >= m.num_nodes) {
        throw BoundsError("edges_" + std::to_string(i) + ".coo: index out of range");
      }
      e.row.push_back(r);
      e.col.push_back(c);
      e.value.push_back(val);
    }
  }
  return m;
}

}  // namespace ntgnn
