#include <gtest/gtest.h>

#include <random>
#include <sstream>

#include "ntgnn/analysis.hpp"
#include "ntgnn/generators.hpp"
#include "support/oracles.hpp"

using namespace ntgnn;
using E = std::vector<std::pair<VertexId, VertexId>>;

namespace {

LabeledGraph star() { return LabeledGraph(4, E{{0, 1}, {0, 2}, {0, 3}}, true); }

Rational influence(const LabeledGraph& g, VertexId u, VertexId v, std::uint32_t k, InfluenceMethod m) {
  return relative_influence(g, u, v, k, m).value();
}

}  // namespace

TEST(Influence, StarCenterLeafAdjacency) {
  EXPECT_EQ(influence(star(), 0, 1, 1, InfluenceMethod::mpnn_hat_adjacency), Rational(1, 4));
}

TEST(Influence, SelfAtDepthZero) {
  auto g = generate_counterexample(Counterexample::fig1_graph);
  for (auto m : kAllInfluenceMethods) {
    auto r = relative_influence(g, 2, 2, 0, m);
    EXPECT_EQ(r.numerator, 1);
    EXPECT_EQ(r.denominator, 1);
  }
}

TEST(Influence, Fig1RedYellow) {
  auto g = generate_counterexample(Counterexample::fig1_graph);
  EXPECT_EQ(influence(g, kFig1Red, kFig1Yellow, 2, InfluenceMethod::unfolding_tree), Rational(1, 8));
  EXPECT_EQ(influence(g, kFig1Red, kFig1Yellow, 2, InfluenceMethod::nt0), Rational(1, 4));
  auto nt1 = influence(g, kFig1Red, kFig1Yellow, 2, InfluenceMethod::nt1);
  EXPECT_LE(Rational(1, 8), nt1);
  EXPECT_LE(nt1, Rational(1, 4));
  EXPECT_TRUE(influence_ordering_check(g, kFig1Red, kFig1Yellow, 2));
}

TEST(Influence, UnreachableIsZero) {
  LabeledGraph g(4, E{{0, 1}, {2, 3}}, true);
  for (auto m : kAllInfluenceMethods) EXPECT_EQ(influence(g, 0, 3, 3, m), Rational(0));
}

TEST(Influence, StarOrderingHoldsWithEquality) {
  auto o = influence_ordering(star(), 0, 1, 1);
  EXPECT_TRUE(o.holds);
  EXPECT_EQ(o.unfolding, o.nt1);
  EXPECT_EQ(o.nt1, o.nt0);
}

TEST(Influence, OrderingPrecondition) {
  EXPECT_THROW(influence_ordering_check(star(), 0, 1, 2), PreconditionError);
  EXPECT_THROW(influence_ordering_check(star(), 0, 9, 1), ArgumentError);
}

TEST(Influence, ValuesLieInUnitInterval) {
  std::mt19937_64 rng(1);
  for (int trial = 0; trial < 20; ++trial) {
    auto g = generate_connected(8, 0.3, rng, 1);
    for (auto m : kAllInfluenceMethods) {
      Rational total = 0;
      for (VertexId v = 0; v < 8; ++v) {
        auto r = influence(g, 0, v, 3, m);
        EXPECT_GE(r, 0);
        EXPECT_LE(r, 1);
        total += r;
      }
      EXPECT_EQ(total, 1);
    }
  }
}

TEST(Influence, DpMatchesExplicitTreeCounts) {
  std::mt19937_64 rng(2);
  for (int trial = 0; trial < 20; ++trial) {
    auto g = generate_connected(6, 0.4, rng, 1);
    for (std::uint32_t k = 0; k <= 4; ++k) {
      auto tree = oracle::explicit_unfolding(g, 0, static_cast<int>(k));
      for (VertexId v = 0; v < 6; ++v) {
        auto r = relative_influence(g, 0, v, k, InfluenceMethod::unfolding_tree);
        EXPECT_EQ(r.denominator, tree.tree.size());
        EXPECT_EQ(r.numerator, std::count(tree.origin.begin(), tree.origin.end(), v));
      }
      for (int red = 0; red <= 1; ++red) {
        auto lit = oracle::literal_knt(g, 0, static_cast<int>(k), red);
        for (VertexId v = 0; v < 6; ++v) {
          auto r = relative_influence(g, 0, v, k, red ? InfluenceMethod::nt1 : InfluenceMethod::nt0);
          EXPECT_EQ(r.denominator, lit.tree.size());
          EXPECT_EQ(r.numerator, std::count(lit.origin.begin(), lit.origin.end(), v));
        }
      }
    }
  }
}

TEST(Influence, AdjacencyPowersMatchWalkCounts) {
  // Path 0-1-2: (A+I)^2 row 0 = (2, 2, 1).
  LabeledGraph p3(3, E{{0, 1}, {1, 2}}, true);
  auto r = relative_influence(p3, 0, 2, 2, InfluenceMethod::mpnn_hat_adjacency);
  EXPECT_EQ(r.numerator, 1);
  EXPECT_EQ(r.denominator, 5);
}

TEST(Influence, OrderingOnRandomGraphs) {
  std::mt19937_64 rng(3);
  std::size_t checked = 0;
  for (int trial = 0; trial < 20; ++trial) {
    auto g = generate_connected(4 + trial % 8, 0.25, rng, 1);
    for (VertexId u = 0; u < static_cast<VertexId>(g.num_vertices()); ++u) {
      auto d = bfs_distances(g, u);
      for (VertexId v = 0; v < static_cast<VertexId>(g.num_vertices()); ++v) {
        if (d[v] > 4) continue;
        EXPECT_TRUE(influence_ordering_check(g, u, v, static_cast<std::uint32_t>(d[v])));
        ++checked;
      }
    }
  }
  EXPECT_GT(checked, 100u);
}

TEST(Influence, Csv) {
  auto g = generate_counterexample(Counterexample::fig1_graph);
  std::vector<InfluenceReport> reports{relative_influence(g, 0, 3, 2, InfluenceMethod::unfolding_tree)};
  std::ostringstream out;
  write_influence_csv(reports, out);
  EXPECT_EQ(out.str(), "u,v,k,method,num,den\n0,3,2,unfolding-tree,1,8\n");
  EXPECT_EQ(parse_influence_method("1-nt"), InfluenceMethod::nt1);
  EXPECT_THROW(parse_influence_method("tpt"), ArgumentError);
}

TEST(Expressivity, HexagonVersusTriangles) {
  std::vector<std::pair<LabeledGraph, LabeledGraph>> pairs{
      {generate_counterexample(Counterexample::hexagon), generate_counterexample(Counterexample::two_triangles)}};
  auto rows = expressivity_report(pairs, {0, 1, 2, 3, 4, 5}, {Redundancy{1}, kUnfolding});
  ASSERT_EQ(rows.size(), 12u);
  for (const auto& r : rows) {
    EXPECT_FALSE(r.wl);
    if (r.k) {
      EXPECT_EQ(r.knt, r.height >= 3) << r.height;
    } else {
      EXPECT_FALSE(r.knt);
    }
  }
}

TEST(Expressivity, Fig7) {
  auto g1 = generate_counterexample(Counterexample::fig7_g1);
  auto g2 = generate_counterexample(Counterexample::fig7_g2);
  for (std::uint32_t h = 0; h <= 6; ++h) {
    auto [a, b] = knt_root_codes(g1, kFig7RedVertex, g2, kFig7RedVertex, h, 1);
    EXPECT_EQ(a, b);
    auto [c, d] = knt_root_codes(g1, kFig7RedVertex, g2, kFig7RedVertex, h, kUnfolding);
    EXPECT_EQ(c != d, h >= 4) << h;
  }
  auto rows = expressivity_report({{g1, g2}}, {3}, {Redundancy{1}});
  EXPECT_TRUE(rows[0].knt);
}

TEST(Expressivity, IsomorphicPairIsNeverDistinguished) {
  std::mt19937_64 rng(4);
  auto g = generate_gnp(9, 0.3, rng, 2);
  auto h = permute_graph(g, random_permutation(9, rng));
  for (const auto& r : expressivity_report({{g, h}}, {0, 1, 2, 3}, {Redundancy{0}, Redundancy{1}, kUnfolding})) {
    EXPECT_FALSE(r.wl);
    EXPECT_FALSE(r.knt);
  }
}

TEST(Expressivity, WlMatchesUnfoldingSignatures) {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 30; ++trial) {
    auto g = generate_gnp(7, 0.35, rng, 2);
    auto h = generate_gnp(7, 0.35, rng, 2);
    for (const auto& r : expressivity_report({{g, h}}, {0, 1, 2, 3}, {kUnfolding})) EXPECT_EQ(r.wl, r.knt);
  }
}

TEST(Expressivity, Csv) {
  std::vector<DistinguishabilityRow> rows{{0, 3, Redundancy{1}, false, true}, {0, 3, kUnfolding, false, false}};
  std::ostringstream out;
  write_distinguishability_csv(rows, out);
  EXPECT_EQ(out.str(), "pair,height,k,wl,knt\n0,3,1,0,1\n0,3,inf,0,0\n");
}

TEST(SizeAudit, PathZeroNt) {
  GraphCollection c;
  c.graphs.emplace_back(3, E{{0, 1}, {1, 2}}, true);
  auto a = size_audit(c, 0, 2);
  ASSERT_EQ(a.rows.size(), 1u);
  EXPECT_LE(a.rows[0].tree_edges, 4u);
  EXPECT_EQ(a.rows[0].m, 4u);
  EXPECT_TRUE(a.within_bounds());
}

TEST(SizeAudit, RandomGraphRatio) {
  std::mt19937_64 rng(6);
  GraphCollection c;
  c.graphs.push_back(generate_gnp(30, 0.2, rng, 1));
  auto a = size_audit(c, 1, 6);
  EXPECT_LE(a.max_tree_ratio, 1.0);
  EXPECT_LE(a.max_merge_ratio, 1.0);
}

TEST(SizeAudit, EmptyGraph) {
  GraphCollection c;
  c.graphs.emplace_back(0, E{}, true);
  auto a = size_audit(c, 2, 3);
  EXPECT_EQ(a.rows[0].tree_edges, 0u);
  EXPECT_EQ(a.rows[0].merge_nodes, 0u);
  EXPECT_EQ(a.rows[0].merge_edges, 0u);
  std::ostringstream out;
  write_size_audit_csv(a, out);
  EXPECT_EQ(out.str(), "graph,n,m,k,tree_edges,merge_nodes,merge_edges\n0,0,0,2,0,0,0\n");
}

TEST(Redundancy, Parse) {
  EXPECT_EQ(parse_redundancy("inf"), kUnfolding);
  EXPECT_EQ(parse_redundancy("3"), Redundancy{3});
  EXPECT_THROW(parse_redundancy("-1"), ArgumentError);
  EXPECT_THROW(parse_redundancy("x"), ArgumentError);
}
