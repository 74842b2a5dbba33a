#include <gtest/gtest.h>

#include <functional>
#include <map>
#include <numeric>
#include <set>
#include <sstream>
#include <random>

#include "ntgnn/canon.hpp"
#include "support/oracles.hpp"

using namespace ntgnn;

namespace {

// Builds a tree from nested child counts: node(label, {children...}).
struct Spec {
  Label label;
  std::vector<Spec> children;
};

RootedTree build(const Spec& s) {
  RootedTree t;
  std::function<NodeId(const Spec&)> rec = [&](const Spec& x) {
    NodeId v = t.add_node(x.label);
    for (const auto& c : x.children) {
      NodeId child = rec(c);
      t.add_child(v, child);
    }
    return v;
  };
  t.root = rec(s);
  return t;
}

// Two trees with identical shape up to child order (uniform labels).
RootedTree fig_left() {
  Spec leaf{0, {}};
  Spec two{0, {leaf, leaf}};
  return build({0, {{0, {two}}, {0, {leaf, two, leaf}}, {0, {leaf, {0, {leaf}}}}}});
}
RootedTree fig_right() {
  Spec leaf{0, {}};
  Spec two{0, {leaf, leaf}};
  return build({0, {{0, {{0, {leaf}}, leaf}}, {0, {two, leaf, leaf}}, {0, {two}}}});
}

std::map<std::int32_t, std::vector<Code>> codes_by_height(const RootedTree& t, CanonTable& table) {
  auto c = canonize_tree(t, table);
  std::map<std::int32_t, std::vector<Code>> out;
  for (std::size_t v = 0; v < t.size(); ++v) out[c.heights[v]].push_back(c.codes[v]);
  for (auto& [h, codes] : out) std::sort(codes.begin(), codes.end());
  return out;
}

}  // namespace

TEST(SortKey, Examples) {
  EXPECT_EQ(sort_key_build(0, std::vector<Code>{}), (CanonKey{0, {}}));
  EXPECT_EQ(sort_key_build(1, std::vector<Code>{3, 2, 3}), (CanonKey{1, {{2, 1}, {3, 2}}}));
  EXPECT_EQ(sort_key_build(1, std::vector<Code>{3, 3, 2}), sort_key_build(1, std::vector<Code>{2, 3, 3}));
  EXPECT_EQ(sort_key_build(5, {{4, 2}, {1, 1}, {4, 1}}), (CanonKey{5, {{1, 1}, {4, 3}}}));
}

TEST(CanonTable, DenseFirstInsertionCodes) {
  CanonTable t;
  EXPECT_EQ(t.get_or_insert({0, {}}), 0);
  EXPECT_EQ(t.get_or_insert({1, {}}), 1);
  EXPECT_EQ(t.get_or_insert({0, {}}), 0);
  EXPECT_EQ(t.get_or_insert({0, {{0, 2}}}), 2);
  EXPECT_EQ(t.size(), 3u);
  EXPECT_EQ(t.key(2), (CanonKey{0, {{0, 2}}}));
  EXPECT_FALSE(t.find({7, {}}).has_value());
  std::ostringstream dump;
  t.dump_jsonl(dump);
  EXPECT_NE(dump.str().find("\"children\":[[0,2]]"), std::string::npos);
}

TEST(Canonize, SingleNodesWithSameLabelShareCode) {
  RootedTree a, b;
  a.add_node(3);
  b.add_node(3);
  EXPECT_TRUE(trees_isomorphic(a, b));
  RootedTree c;
  c.add_node(4);
  EXPECT_FALSE(trees_isomorphic(a, c));
}

TEST(Canonize, PathVersusStar) {
  auto path = oracle::from_parents({-1, 0, 1});
  auto star = oracle::from_parents({-1, 0, 0});
  EXPECT_FALSE(trees_isomorphic(path, star));
  EXPECT_FALSE(oracle::brute_force_isomorphic(path, star));
  EXPECT_TRUE(trees_isomorphic(path, path));
}

TEST(Canonize, FigureTreesAreIsomorphicWithEqualLevelMultisets) {
  auto t1 = fig_left(), t2 = fig_right();
  EXPECT_EQ(t1.size(), 15u);
  EXPECT_TRUE(trees_isomorphic(t1, t2));
  EXPECT_TRUE(oracle::brute_force_isomorphic(t1, t2));
  CanonTable table;
  EXPECT_EQ(codes_by_height(t1, table), codes_by_height(t2, table));
}

TEST(Canonize, MultiplicityEqualsRepeatedChildren) {
  // root -> leaf (mult 2) vs root -> leaf, leaf
  ChildLists merged{{{1, 2}}, {}};
  ChildLists plain{{{1, 1}, {2, 1}}, {}, {}};
  CanonTable table;
  std::vector<Label> l2{0, 0}, l3{0, 0, 0};
  EXPECT_EQ(canonize_dag(l2, merged, table).codes[0], canonize_dag(l3, plain, table).codes[0]);
}

TEST(Canonize, DetectsCycles) {
  ChildLists cyc{{{1, 1}}, {{0, 1}}};
  std::vector<Label> l{0, 0};
  CanonTable table;
  EXPECT_THROW(canonize_dag(l, cyc, table), StructureError);
  ChildLists dangling{{{5, 1}}};
  std::vector<Label> l1{0};
  EXPECT_THROW(canonize_dag(l1, dangling, table), StructureError);
}

TEST(Canonize, HeightsAreLongestPaths) {
  ChildLists c{{{1, 1}, {2, 1}}, {{2, 1}}, {}};
  EXPECT_EQ(dag_heights(c), (std::vector<std::int32_t>{2, 1, 0}));
}

TEST(Canonize, AgreesWithBruteForceOnSmallTrees) {
  for (int n = 1; n <= 5; ++n) {
    auto trees = oracle::all_recursive_trees(n);
    for (std::size_t i = 0; i < trees.size(); ++i) {
      for (std::size_t j = i; j < trees.size(); ++j) {
        ASSERT_EQ(trees_isomorphic(trees[i], trees[j]), oracle::brute_force_isomorphic(trees[i], trees[j]));
      }
    }
  }
}

TEST(Canonize, CountsRootedTreeClasses) {
  // Rooted unlabeled trees on n nodes: 1, 1, 2, 4, 9, 20, 48.
  const std::size_t expected[] = {1, 1, 2, 4, 9, 20, 48};
  for (int n = 1; n <= 7; ++n) {
    CanonTable table;
    std::set<Code> roots;
    for (const auto& t : oracle::all_recursive_trees(n)) roots.insert(canonize_tree(t, table).codes[t.root]);
    EXPECT_EQ(roots.size(), expected[n - 1]) << n;
  }
}

TEST(Canonize, ShuffledCopiesAreIsomorphic) {
  std::mt19937_64 rng(9);
  for (int i = 0; i < 200; ++i) {
    auto t = oracle::random_tree(1 + ntgnn::uniform_index(rng, 20), 3, rng);
    auto s = oracle::shuffled_copy(t, rng);
    EXPECT_TRUE(trees_isomorphic(t, s));
  }
}

TEST(Canonize, PartitionIndependentOfInsertionOrder) {
  std::mt19937_64 rng(21);
  std::vector<RootedTree> trees;
  for (int i = 0; i < 60; ++i) trees.push_back(oracle::random_tree(1 + i % 6, 2, rng));
  auto root_codes = [&](const std::vector<std::size_t>& order) {
    CanonTable table;
    std::vector<Code> codes(trees.size());
    for (std::size_t i : order) codes[i] = canonize_tree(trees[i], table).codes[trees[i].root];
    return codes;
  };
  std::vector<std::size_t> fwd(trees.size()), rev;
  std::iota(fwd.begin(), fwd.end(), std::size_t{0});
  rev.assign(fwd.rbegin(), fwd.rend());
  auto a = root_codes(fwd), b = root_codes(rev);
  for (std::size_t i = 0; i < trees.size(); ++i) {
    for (std::size_t j = 0; j < trees.size(); ++j) EXPECT_EQ(a[i] == a[j], b[i] == b[j]);
  }
}
