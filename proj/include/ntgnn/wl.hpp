#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <vector>

#include "ntgnn/graph.hpp"

namespace ntgnn {

using Color = std::int64_t;

// 1-WL color refinement. The interning table lives as long as the refiner, so
// colors computed for several graphs with the same refiner are comparable.
// Colors of iteration 0 are the vertex labels; later colors are dense ids
// assigned in first-seen order (vertex order scan).
class WlRefiner {
 public:
  // Returns colors for iterations 0..iterations.
  std::vector<std::vector<Color>> refine(const LabeledGraph& g, std::size_t iterations) {
    std::vector<std::vector<Color>> colors;
    colors.reserve(iterations + 1);
    colors.emplace_back(g.labels().begin(), g.labels().end());
    std::vector<Color> key;
    for (std::size_t it = 1; it <= iterations; ++it) {
      const auto& prev = colors.back();
      std::vector<Color> next(g.num_vertices());
      for (std::size_t v = 0; v < g.num_vertices(); ++v) {
        key.clear();
        key.push_back(static_cast<Color>(it));
        key.push_back(prev[v]);
        for (VertexId u : g.neighbors(static_cast<VertexId>(v))) key.push_back(prev[u]);
        std::sort(key.begin() + 2, key.end());
        auto [pos, inserted] = table_.try_emplace(key, static_cast<Color>(table_.size()));
        next[v] = pos->second;
      }
      colors.push_back(std::move(next));
    }
    return colors;
  }

  std::size_t table_size() const { return table_.size(); }

 private:
  // Key: (iteration, own color, sorted neighbor colors).
  std::map<std::vector<Color>, Color> table_;
};

inline std::vector<std::vector<Color>> wl_refinement(const LabeledGraph& g, std::size_t iterations) {
  WlRefiner refiner;
  return refiner.refine(g, iterations);
}

// Sorted color multiset of one iteration.
inline std::vector<Color> color_histogram(std::vector<Color> colors) {
  std::sort(colors.begin(), colors.end());
  return colors;
}

}  // namespace ntgnn
