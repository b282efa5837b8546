#pragma once

#include <cstdint>
#include <istream>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "dgem/corpus.hpp"

namespace dgem {

using VertexId = std::uint32_t;

enum class GraphMode { Static, Dynamic };

// Bijection between item tokens and dense vertex indices 0..n-1.
class Interner {
 public:
  VertexId intern(const std::string& token) {
    auto [it, inserted] = index_.try_emplace(token, static_cast<VertexId>(tokens_.size()));
    if (inserted) tokens_.push_back(token);
    return it->second;
  }

  std::optional<VertexId> find(const std::string& token) const {
    auto it = index_.find(token);
    if (it == index_.end()) return std::nullopt;
    return it->second;
  }

  const std::string& token(VertexId v) const { return tokens_.at(v); }
  std::size_t size() const { return tokens_.size(); }
  const std::vector<std::string>& tokens() const { return tokens_; }

 private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, VertexId> index_;
};

// Out-edge of the item graph. wf counts consecutive-pair occurrences; in
// dynamic mode wt holds one timestamp per occurrence (|wt| == wf, sorted).
struct EdgeRecord {
  VertexId dst = 0;
  std::uint64_t wf = 0;
  std::vector<std::int64_t> wt;
};

// Directed weighted item graph, adjacency-list storage. Adjacency lists are
// sorted by dst index; construction is single-writer and the graph is
// immutable afterwards.
struct ItemGraph {
  GraphMode mode = GraphMode::Static;
  Interner intern;
  std::vector<std::vector<EdgeRecord>> adj;

  std::size_t vertex_count() const { return adj.size(); }
  std::size_t edge_count() const;
  std::uint64_t total_weight() const;
  std::uint64_t instance_count() const;  // == total_weight in dynamic mode
};

// Builds the static graph: one edge per ordered item pair that appears
// consecutively in some user sequence, wf = occurrence count across users.
// Vertex ids are assigned by sorted item token so the result is independent
// of user order.
ItemGraph build_static_graph(const std::vector<UserSequence>& sequences);

// As build_static_graph, plus each occurrence appends the later item's
// timestamp to the edge's wt list.
ItemGraph build_dynamic_graph(const std::vector<UserSequence>& sequences);

// Read-only view of v's adjacency list. Throws std::out_of_range.
std::span<const EdgeRecord> out_edges(const ItemGraph& g, VertexId v);

// Sum of wf over v's out-edges; 0 for sinks. Throws std::out_of_range.
std::uint64_t total_out_weight(const ItemGraph& g, VertexId v);

// Text format:
//   DGEM-GRAPH v1 <static|dynamic> <n> <m>
//   # vertex <id> <token>          (interning table, one line per vertex)
//   <src>\t<dst>\t<wf>[\t<t1,t2,...>]
// '#' lines are comments; the vertex comments make the file self-describing.
void write_graph(const ItemGraph& g, std::ostream& out);
ItemGraph read_graph(std::istream& in);

}  // namespace dgem
