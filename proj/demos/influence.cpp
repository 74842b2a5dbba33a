// Relative influence of the yellow vertex on the red vertex of the paw graph
// at depth 2, for every method, plus the ordering on a random graph.

#include <iostream>
#include <random>

#include "ntgnn/analysis.hpp"
#include "ntgnn/generators.hpp"

using namespace ntgnn;

int main() {
  const auto paw = generate_counterexample(Counterexample::fig1_graph);
  std::cout << "paw graph, red=" << kFig1Red << " yellow=" << kFig1Yellow << " k=2\n";
  for (auto m : kAllInfluenceMethods) {
    const auto r = relative_influence(paw, kFig1Red, kFig1Yellow, 2, m);
    std::cout << "  " << to_string(m) << ": " << r.numerator << '/' << r.denominator << '\n';
  }

  std::mt19937_64 rng(42);
  const auto g = generate_connected(10, 0.25, rng, 1);
  std::size_t pairs = 0, holding = 0;
  for (VertexId u = 0; u < 10; ++u) {
    const auto dist = bfs_distances(g, u);
    for (VertexId v = 0; v < 10; ++v) {
      if (dist[v] > 4) continue;
      ++pairs;
      holding += influence_ordering_check(g, u, v, static_cast<std::uint32_t>(dist[v]));
    }
  }
  std::cout << "random G(10, 0.25): ordering holds for " << holding << " of " << pairs << " pairs\n";
}
