// Builds the 0-NTs of the path a-b-a, merges them and prints the layered
// matrices the DAG-MLP consumes.

#include <iostream>

#include "ntgnn/matrices.hpp"
#include "ntgnn/merge_dag.hpp"
#include "ntgnn/tree_builder.hpp"

using namespace ntgnn;

int main() {
  GraphCollection coll;
  coll.graphs.emplace_back(3, std::vector<std::pair<VertexId, VertexId>>{{0, 1}, {1, 2}}, true,
                           std::vector<Label>{0, 1, 0});
  reindex_labels(coll);

  for (auto labeling : {Labeling::phi, Labeling::mu}) {
    MergeDag dag(labeling);
    for (std::uint32_t h = 0; h <= 2; ++h) {
      for (VertexId v = 0; v < 3; ++v) dag.add_tree(build_knt_dag(coll.graphs[0], v, h, 0));
    }
    dag.compute_layers();
    const auto m = export_matrices(dag, coll, FeatureMode::one_hot_label);
    std::cout << to_string(labeling) << ": " << dag.num_nodes() << " nodes, " << dag.num_edges() << " edges\n";
    for (std::size_t i = 0; i <= m.height; ++i) {
      std::cout << "  L_" << i << " =";
      for (NodeId r : m.layer_rows[i]) std::cout << ' ' << r;
      std::cout << "   E_" << i << " =";
      const auto& e = m.edge_layers[i];
      for (std::size_t k = 0; k < e.nnz(); ++k) std::cout << " (" << e.row[k] << ',' << e.col[k] << ")x" << e.value[k];
      std::cout << '\n';
    }
    std::cout << "  xi =";
    for (NodeId r : m.root_rows) std::cout << ' ' << r;
    std::cout << '\n';
  }
}
