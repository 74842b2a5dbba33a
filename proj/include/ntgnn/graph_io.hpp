#pragma once

#include <algorithm>
#include <charconv>
#include <istream>
#include <iterator>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "ntgnn/error.hpp"
#include "ntgnn/graph.hpp"

namespace ntgnn {

enum class GraphFormat { edge_list, json_collection };

inline GraphFormat parse_graph_format(std::string_view name) {
  if (name == "edge-list") return GraphFormat::edge_list;
  if (name == "json-collection" || name == "json") return GraphFormat::json_collection;
  throw ArgumentError("unknown graph format '" + std::string(name) + "'");
}

namespace detail {

struct LineReader {
  std::istream& in;
  std::size_t line_no = 0;

  // Next non-empty line with comments stripped, split on whitespace.
  bool next(std::vector<std::string>& tokens) {
    std::string line;
    while (std::getline(in, line)) {
      ++line_no;
      if (auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
      std::istringstream ss(line);
      tokens.assign(std::istream_iterator<std::string>(ss), std::istream_iterator<std::string>());
      if (!tokens.empty()) return true;
    }
    return false;
  }
};

template <typename T>
T parse_number(const std::string& token, std::size_t line) {
  T value{};
  if constexpr (std::is_floating_point_v<T>) {
    // from_chars for doubles is incomplete in older libstdc++.
    std::size_t used = 0;
    try {
      value = static_cast<T>(std::stod(token, &used));
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != token.size() || token.empty()) throw ParseError("expected a number, got '" + token + "'", line);
  } else {
    auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
    if (ec != std::errc() || ptr != token.data() + token.size()) {
      throw ParseError("expected an integer, got '" + token + "'", line);
    }
  }
  return value;
}

inline std::size_t line_of_offset(const std::string& text, std::size_t offset) {
  offset = std::min(offset, text.size());
  return 1 + static_cast<std::size_t>(std::count(text.begin(), text.begin() + offset, '\n'));
}

}  // namespace detail

// Edge-list format, one or more sections:
//
//   n m d
//   <n label lines: one integer label, or d floats when d > 0>
//   <m edge lines: u v>
//
// Edges are undirected. '#' starts a comment.
inline GraphCollection parse_edge_list(std::istream& in) {
  GraphCollection coll;
  detail::LineReader reader{in};
  std::vector<std::string> tok;
  while (reader.next(tok)) {
    const std::size_t header_line = reader.line_no;
    if (tok.size() != 3) throw ParseError("header must be 'n m d'", header_line);
    auto n = detail::parse_number<std::size_t>(tok[0], header_line);
    auto m = detail::parse_number<std::size_t>(tok[1], header_line);
    auto d = detail::parse_number<std::size_t>(tok[2], header_line);

    std::vector<Label> labels;
    std::optional<FeatureMatrix> features;
    if (d > 0) features = FeatureMatrix{d, {}};
    for (std::size_t i = 0; i < n; ++i) {
      if (!reader.next(tok)) throw ParseError("unexpected end of input in label section", reader.line_no);
      if (d == 0) {
        if (tok.size() != 1) throw ParseError("label line must hold one integer", reader.line_no);
        labels.push_back(detail::parse_number<Label>(tok[0], reader.line_no));
        if (labels.back() < 0) throw ParseError("labels must be non-negative", reader.line_no);
      } else {
        if (tok.size() != d) {
          throw DimensionError("line " + std::to_string(reader.line_no) + ": expected " +
                               std::to_string(d) + " feature values, got " + std::to_string(tok.size()));
        }
        for (const auto& t : tok) features->values.push_back(detail::parse_number<double>(t, reader.line_no));
      }
    }
    std::vector<std::pair<VertexId, VertexId>> edges;
    for (std::size_t i = 0; i < m; ++i) {
      if (!reader.next(tok)) throw ParseError("unexpected end of input in edge section", reader.line_no);
      if (tok.size() != 2) throw ParseError("edge line must be 'u v'", reader.line_no);
      auto u = detail::parse_number<std::int64_t>(tok[0], reader.line_no);
      auto v = detail::parse_number<std::int64_t>(tok[1], reader.line_no);
      if (u < 0 || v < 0 || static_cast<std::size_t>(u) >= n || static_cast<std::size_t>(v) >= n) {
        throw BoundsError("line " + std::to_string(reader.line_no) + ": edge endpoint outside [0, " +
                          std::to_string(n) + ")");
      }
      if (u == v) throw ParseError("self-loops are not allowed", reader.line_no);
      edges.emplace_back(static_cast<VertexId>(u), static_cast<VertexId>(v));
    }
    coll.graphs.emplace_back(n, std::move(edges), true, std::move(labels), std::move(features));
  }
  reindex_labels(coll);
  return coll;
}

// JSON collection: [{"num_vertices": n, "edges": [[u, v], ...], "labels": [...],
// "features": [[...], ...], "class": c, "directed": false}, ...]. Only
// num_vertices and edges are required.
inline GraphCollection parse_json_collection(std::istream& in) {
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(e.what(), detail::line_of_offset(text, e.byte));
  }
  if (!doc.is_array()) throw ParseError("top-level JSON value must be an array", 1);

  GraphCollection coll;
  for (std::size_t gi = 0; gi < doc.size(); ++gi) {
    const auto& obj = doc[gi];
    const std::string where = "graph " + std::to_string(gi);
    try {
      auto n = obj.at("num_vertices").get<std::size_t>();
      bool directed = obj.value("directed", false);
      std::vector<std::pair<VertexId, VertexId>> edges;
      for (const auto& e : obj.at("edges")) {
        if (!e.is_array() || e.size() != 2) throw DataError(where + ": edges must be [u, v] pairs");
        auto u = e[0].get<std::int64_t>();
        auto v = e[1].get<std::int64_t>();
        if (u < 0 || v < 0 || static_cast<std::size_t>(u) >= n || static_cast<std::size_t>(v) >= n) {
          throw BoundsError(where + ": edge endpoint outside [0, " + std::to_string(n) + ")");
        }
        edges.emplace_back(static_cast<VertexId>(u), static_cast<VertexId>(v));
      }
      std::vector<Label> labels;
      if (obj.contains("labels")) labels = obj["labels"].get<std::vector<Label>>();
      std::optional<FeatureMatrix> features;
      if (obj.contains("features") && !obj["features"].empty()) {
        const auto& rows = obj["features"];
        features = FeatureMatrix{rows[0].size(), {}};
        for (const auto& row : rows) {
          if (row.size() != features->dim) throw DimensionError(where + ": inconsistent feature dimension");
          for (const auto& x : row) features->values.push_back(x.get<double>());
        }
      }
      std::optional<std::int64_t> cls;
      if (obj.contains("class") && !obj["class"].is_null()) cls = obj["class"].get<std::int64_t>();
      coll.graphs.emplace_back(n, std::move(edges), !directed, std::move(labels), std::move(features), cls);
    } catch (const nlohmann::json::exception& e) {
      throw DataError(where + ": " + e.what());
    }
  }
  reindex_labels(coll);
  return coll;
}

inline GraphCollection parse_graph_file(std::istream& in, GraphFormat format) {
  return format == GraphFormat::edge_list ? parse_edge_list(in) : parse_json_collection(in);
}

inline nlohmann::json graph_to_json(const LabeledGraph& g) {
  nlohmann::json obj;
  obj["num_vertices"] = g.num_vertices();
  auto edges = nlohmann::json::array();
  for (auto [u, v] : g.edges()) {
    if (!g.undirected() || u < v) edges.push_back({u, v});
  }
  obj["edges"] = std::move(edges);
  if (!g.undirected()) obj["directed"] = true;
  if (g.has_discrete_labels()) obj["labels"] = g.labels();
  if (g.features()) {
    auto rows = nlohmann::json::array();
    for (std::size_t r = 0; r < g.num_vertices(); ++r) {
      auto row = g.features()->row(r);
      rows.push_back(std::vector<double>(row.begin(), row.end()));
    }
    obj["features"] = std::move(rows);
  }
  if (g.graph_class()) obj["class"] = *g.graph_class();
  return obj;
}

// One graph object per line; byte-stable for equal collections.
inline void write_json_collection(const GraphCollection& coll, std::ostream& out) {
  out << "[\n";
  for (std::size_t i = 0; i < coll.graphs.size(); ++i) {
    out << graph_to_json(coll.graphs[i]).dump() << (i + 1 < coll.graphs.size() ? ",\n" : "\n");
  }
  out << "]\n";
}

}  // namespace ntgnn
