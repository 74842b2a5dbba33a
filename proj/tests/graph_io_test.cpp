#include <gtest/gtest.h>

#include <sstream>

#include "ntgnn/generators.hpp"
#include "ntgnn/graph_io.hpp"

using namespace ntgnn;

namespace {

GraphCollection parse(const std::string& text, GraphFormat f = GraphFormat::edge_list) {
  std::istringstream in(text);
  return parse_graph_file(in, f);
}

template <typename E>
std::size_t error_line(const std::string& text) {
  try {
    parse(text);
  } catch (const ParseError& e) {
    return e.line();
  }
  return 0;
}

}  // namespace

TEST(EdgeList, PathP3) {
  auto c = parse("3 2 0\n0\n0\n0\n0 1\n1 2\n");
  ASSERT_EQ(c.graphs.size(), 1u);
  EXPECT_EQ(c.graphs[0].num_vertices(), 3u);
  EXPECT_EQ(c.graphs[0].num_edge_records(), 4u);
  EXPECT_EQ(c.label_dimension, 1u);
}

TEST(EdgeList, EmptySection) {
  auto c = parse("0 0 0\n");
  ASSERT_EQ(c.graphs.size(), 1u);
  EXPECT_EQ(c.graphs[0].num_vertices(), 0u);
  EXPECT_EQ(c.graphs[0].num_edge_records(), 0u);
}

TEST(EdgeList, HexagonWithComments) {
  auto c = parse("# C6\n6 6 0\n0\n0\n0\n0\n0\n0\n0 1\n1 2 # chord-free\n2 3\n3 4\n4 5\n5 0\n");
  for (VertexId v = 0; v < 6; ++v) EXPECT_EQ(c.graphs[0].degree(v), 2u);
}

TEST(EdgeList, MultipleSectionsAndReindexing) {
  auto c = parse("2 1 0\n5\n9\n0 1\n1 0 0\n9\n");
  ASSERT_EQ(c.graphs.size(), 2u);
  EXPECT_EQ(c.label_dimension, 2u);
  EXPECT_EQ(c.graphs[0].labels(), (std::vector<Label>{0, 1}));
  EXPECT_EQ(c.graphs[1].labels(), (std::vector<Label>{1}));
}

TEST(EdgeList, Features) {
  auto c = parse("2 1 2\n0.5 1\n2 3e-1\n0 1\n");
  ASSERT_TRUE(c.graphs[0].features());
  EXPECT_EQ(c.graphs[0].features()->dim, 2u);
  EXPECT_DOUBLE_EQ(c.graphs[0].features()->row(1)[1], 0.3);
  EXPECT_FALSE(c.graphs[0].has_discrete_labels());
}

TEST(EdgeList, Errors) {
  EXPECT_EQ(error_line<ParseError>("3 2 0\n0\nx\n0\n0 1\n1 2\n"), 3u);
  EXPECT_EQ(error_line<ParseError>("\n\n3 2\n"), 3u);
  EXPECT_EQ(error_line<ParseError>("2 1 0\n0\n0\n0 1 2\n"), 4u);
  EXPECT_EQ(error_line<ParseError>("2 1 0\n0\n0\n"), 3u);
  EXPECT_THROW(parse("2 1 0\n0\n0\n0 2\n"), BoundsError);
  EXPECT_THROW(parse("2 1 2\n0 1\n1\n0 1\n"), DimensionError);
  EXPECT_THROW(parse("2 1 0\n0\n0\n1 1\n"), ParseError);
}

TEST(JsonCollection, ParsesAndRoundTrips) {
  const std::string text =
      R"([{"num_vertices":3,"edges":[[0,1],[1,2]],"labels":[4,4,2],"class":1},)"
      R"({"num_vertices":2,"edges":[[0,1]],"features":[[1.5],[2.5]]}])";
  auto c = parse(text, GraphFormat::json_collection);
  ASSERT_EQ(c.graphs.size(), 2u);
  EXPECT_EQ(c.graphs[0].graph_class(), 1);
  EXPECT_EQ(c.graphs[0].labels(), (std::vector<Label>{1, 1, 0}));
  EXPECT_EQ(c.graphs[1].features()->values, (std::vector<double>{1.5, 2.5}));

  std::ostringstream out;
  write_json_collection(c, out);
  auto again = parse(out.str(), GraphFormat::json_collection);
  ASSERT_EQ(again.graphs.size(), 2u);
  for (std::size_t i = 0; i < 2; ++i) {
    EXPECT_EQ(again.graphs[i].edges(), c.graphs[i].edges());
    EXPECT_EQ(again.graphs[i].labels(), c.graphs[i].labels());
    EXPECT_EQ(again.graphs[i].graph_class(), c.graphs[i].graph_class());
  }
}

TEST(JsonCollection, Errors) {
  EXPECT_THROW(parse("{}", GraphFormat::json_collection), ParseError);
  EXPECT_THROW(parse("[{\"num_vertices\":2,\"edges\":[[0,5]]}]", GraphFormat::json_collection), BoundsError);
  EXPECT_THROW(parse("[{\"num_vertices\":2,\"edges\":[],\"features\":[[1],[1,2]]}]", GraphFormat::json_collection),
               DimensionError);
  try {
    parse("[\n{\"num_vertices\":2,\n\"edges\": [[0,1]\n", GraphFormat::json_collection);
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_GE(e.line(), 3u);
  }
}

TEST(GraphFormatNames, Parse) {
  EXPECT_EQ(parse_graph_format("edge-list"), GraphFormat::edge_list);
  EXPECT_EQ(parse_graph_format("json"), GraphFormat::json_collection);
  EXPECT_THROW(parse_graph_format("csv"), ArgumentError);
}
