#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <ostream>
#include <span>
#include <unordered_map>
#include <utility>
#include <vector>

#include <json.hpp>

#include "ntgnn/error.hpp"
#include "ntgnn/graph.hpp"

namespace ntgnn {

using NodeId = std::int32_t;
using Code = std::int32_t;

inline constexpr Code kNoCode = -1;

// Child reference with edge multiplicity; parallel edges between the same
// pair of DAG nodes are stored once with mult > 1.
struct ChildRef {
  NodeId node;
  std::uint32_t mult = 1;

  friend bool operator==(const ChildRef&, const ChildRef&) = default;
};

using ChildLists = std::vector<std::vector<ChildRef>>;

// Canonical key of a node: its label followed by the child-code multiset,
// ascending, with equal codes collapsed into (code, count).
struct CanonKey {
  Label label = 0;
  std::vector<std::pair<Code, std::uint32_t>> children;

  friend bool operator==(const CanonKey&, const CanonKey&) = default;
};

inline CanonKey sort_key_build(Label label, std::vector<std::pair<Code, std::uint32_t>> child_codes) {
  std::sort(child_codes.begin(), child_codes.end());
  CanonKey key{label, {}};
  for (auto [code, count] : child_codes) {
    if (count == 0) continue;
    if (!key.children.empty() && key.children.back().first == code) {
      key.children.back().second += count;
    } else {
      key.children.emplace_back(code, count);
    }
  }
  return key;
}

inline CanonKey sort_key_build(Label label, std::span<const Code> child_codes) {
  std::vector<std::pair<Code, std::uint32_t>> pairs;
  pairs.reserve(child_codes.size());
  for (Code c : child_codes) pairs.emplace_back(c, 1);
  return sort_key_build(label, std::move(pairs));
}

struct CanonKeyHash {
  std::size_t operator()(const CanonKey& key) const noexcept {
    std::uint64_t h = 0x9e3779b97f4a7c15ull ^ static_cast<std::uint64_t>(key.label);
    auto mix = [&h](std::uint64_t x) {
      h ^= x + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
    };
    for (auto [code, count] : key.children) {
      mix(static_cast<std::uint64_t>(code));
      mix(count);
    }
    return static_cast<std::size_t>(h);
  }
};

// Injective interning map (label, child-code multiset) -> code. Codes are
// dense in first-insertion order and never change during the table's
// lifetime, so codes from different DAGs canonized with one table are
// comparable. Not synchronized: confine a table to one thread.
class CanonTable {
 public:
  Code get_or_insert(const CanonKey& key) {
    auto [it, inserted] = index_.try_emplace(key, static_cast<Code>(keys_.size()));
    if (inserted) keys_.push_back(key);
    return it->second;
  }

  std::optional<Code> find(const CanonKey& key) const {
    auto it = index_.find(key);
    if (it == index_.end()) return std::nullopt;
    return it->second;
  }

  std::size_t size() const { return keys_.size(); }
  const CanonKey& key(Code code) const { return keys_.at(static_cast<std::size_t>(code)); }

  // Debug dump, one JSON object per line: {"code","label","children":[[c,n],...]}.
  void dump_jsonl(std::ostream& out) const {
    for (std::size_t c = 0; c < keys_.size(); ++c) {
      nlohmann::json line;
      line["code"] = c;
      line["label"] = keys_[c].label;
      line["children"] = keys_[c].children;
      out << line.dump() << '\n';
    }
  }

 private:
  std::unordered_map<CanonKey, Code, CanonKeyHash> index_;
  std::vector<CanonKey> keys_;
};

// Longest-path-from-leaf heights; throws StructureError on a cycle or a
// dangling child reference.
inline std::vector<std::int32_t> dag_heights(const ChildLists& children) {
  const std::size_t n = children.size();
  std::vector<std::int32_t> height(n, -1);
  std::vector<std::uint8_t> state(n, 0);  // 0 new, 1 on stack, 2 done
  std::vector<std::pair<NodeId, std::size_t>> stack;
  for (std::size_t start = 0; start < n; ++start) {
    if (state[start] == 2) continue;
    stack.emplace_back(static_cast<NodeId>(start), 0);
    state[start] = 1;
    while (!stack.empty()) {
      auto& [node, next] = stack.back();
      const auto& ch = children[node];
      if (next < ch.size()) {
        NodeId c = ch[next++].node;
        if (c < 0 || static_cast<std::size_t>(c) >= n) throw StructureError("child reference out of range");
        if (state[c] == 1) throw StructureError("cycle detected in DAG");
        if (state[c] == 0) {
          state[c] = 1;
          stack.emplace_back(c, 0);
        }
        continue;
      }
      std::int32_t h = 0;
      for (const auto& c : ch) h = std::max(h, height[c.node] + 1);
      height[node] = h;
      state[node] = 2;
      stack.pop_back();
    }
  }
  return height;
}

struct CanonizedDag {
  std::vector<Code> codes;
  std::vector<std::int32_t> heights;
};

// AHU-style canonization of a node-labeled DAG (possibly multi-rooted).
// Nodes are processed in non-decreasing height; each node receives
// f(label, multiset of child codes), so two nodes share a code iff their tree
// expansions are isomorphic as labeled rooted trees.
inline CanonizedDag canonize_dag(std::span<const Label> labels, const ChildLists& children,
                                 CanonTable& table) {
  if (labels.size() != children.size()) throw DimensionError("label count does not match node count");
  CanonizedDag out;
  out.heights = dag_heights(children);
  const std::size_t n = children.size();
  std::int32_t max_height = 0;
  for (auto h : out.heights) max_height = std::max(max_height, h);

  std::vector<std::vector<NodeId>> by_height(n == 0 ? 0 : max_height + 1);
  for (std::size_t v = 0; v < n; ++v) by_height[out.heights[v]].push_back(static_cast<NodeId>(v));

  out.codes.assign(n, kNoCode);
  std::vector<std::pair<Code, std::uint32_t>> child_codes;
  for (const auto& level : by_height) {
    for (NodeId v : level) {
      child_codes.clear();
      for (const auto& c : children[v]) child_codes.emplace_back(out.codes[c.node], c.mult);
      out.codes[v] = table.get_or_insert(sort_key_build(labels[v], child_codes));
    }
  }
  return out;
}

// Explicit rooted labeled tree (in-tree given by child lists).
struct RootedTree {
  std::vector<Label> labels;
  std::vector<std::vector<NodeId>> children;
  NodeId root = 0;

  std::size_t size() const { return labels.size(); }

  NodeId add_node(Label label) {
    labels.push_back(label);
    children.emplace_back();
    return static_cast<NodeId>(labels.size() - 1);
  }
  void add_child(NodeId parent, NodeId child) { children[parent].push_back(child); }
};

inline ChildLists to_child_lists(const RootedTree& t) {
  ChildLists out(t.size());
  for (std::size_t v = 0; v < t.size(); ++v) {
    for (NodeId c : t.children[v]) out[v].push_back({c, 1});
  }
  return out;
}

inline CanonizedDag canonize_tree(const RootedTree& t, CanonTable& table) {
  return canonize_dag(t.labels, to_child_lists(t), table);
}

inline bool trees_isomorphic(const RootedTree& t1, const RootedTree& t2) {
  if (t1.size() != t2.size()) return false;
  if (t1.size() == 0) return true;
  CanonTable table;
  Code a = canonize_tree(t1, table).codes[t1.root];
  Code b = canonize_tree(t2, table).codes[t2.root];
  return a == b;
}

}  // namespace ntgnn
