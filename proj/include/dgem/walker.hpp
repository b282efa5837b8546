#pragma once

#include <cstdint>
#include <istream>
#include <optional>
#include <ostream>
#include <span>
#include <utility>
#include <vector>

#include "dgem/item_graph.hpp"
#include "dgem/rng.hpp"

namespace dgem {

struct StaticWalkConfig {
  std::size_t walk_length = 12;
  std::size_t walks_per_vertex = 20;
  double alpha = 1.0;  // stay hyperparameter; 0 never leaves the vertex
  std::uint64_t seed = 1;
};

// One realization of an edge: a dynamic edge with wf = k contributes k
// instances, one per timestamp in its wt list.
struct TemporalEdgeInstance {
  VertexId src = 0;
  VertexId dst = 0;
  std::int64_t t = 0;

  friend bool operator==(const TemporalEdgeInstance&, const TemporalEdgeInstance&) = default;
};

enum class BiasMode { Uniform, Exponential, Linear };

struct Walk {
  std::vector<VertexId> vertices;
  std::vector<std::int64_t> times;  // temporal walks only; |times| == |vertices|-1
  bool temporal() const { return !times.empty(); }
};

struct WalkBatch {
  std::vector<Walk> walks;
  std::size_t discarded_short = 0;  // walks that never reached 2 vertices
};

// Transition kernel of the unequal-probability walk. Entries with positive
// probability only: alpha * wf/W for each out-neighbor, plus (1-alpha) stay
// mass on v itself (merged with a self-loop's share when present). A sink
// (W = 0) is absorbing: {v: 1}. Entries are sorted by vertex id and sum to 1.
std::vector<std::pair<VertexId, double>> transition_distribution(const ItemGraph& g,
                                                                 VertexId v, double alpha);

// Single step drawn from transition_distribution.
VertexId sample_next(const ItemGraph& g, VertexId v, double alpha, Rng& rng);

// walks_per_vertex passes over a freshly shuffled vertex order, one walk per
// vertex per pass, each extended until walk_length vertices or a sink.
// Per-walk RNG streams are derived from the seed by walk index, so the output
// does not depend on scheduling; walks shorter than 2 vertices are dropped
// and counted.
WalkBatch static_walks(const ItemGraph& g, const StaticWalkConfig& cfg);

// Selection probabilities over candidates listed in ascending-time order:
// Uniform 1/K, Exponential softmax of the raw times (shift-invariant, computed
// with max subtraction), Linear proportional to ascending-time rank (1 =
// earliest). Returns a vector summing to 1.
std::vector<double> bias_probabilities(std::span<const double> ascending_times, BiasMode mode);

// All temporal edge instances of the graph in ascending (t, src, dst) order.
std::vector<TemporalEdgeInstance> temporal_instances(const ItemGraph& g);

// Instances leaving cur.dst with t >= cur.t (t > cur.t when strict), in
// ascending (t, dst) order. This is exactly the candidate set temporal_next
// draws from.
std::vector<TemporalEdgeInstance> temporal_candidates(const ItemGraph& g,
                                                      const TemporalEdgeInstance& cur,
                                                      bool strict = false);

// Start-edge draw over all temporal instances. Throws std::invalid_argument
// when the graph has none.
TemporalEdgeInstance sample_start_edge(const ItemGraph& g, BiasMode mode, Rng& rng);

// Next instance, or nullopt when the candidate set is empty (terminal).
std::optional<TemporalEdgeInstance> temporal_next(const ItemGraph& g,
                                                  const TemporalEdgeInstance& cur,
                                                  BiasMode mode, Rng& rng,
                                                  bool strict = false);

// count walks, each started at sample_start_edge and extended via
// temporal_next until terminal or max_length vertices. Emitted walks carry
// the traversed timestamps, which are non-decreasing by construction.
WalkBatch temporal_walks(const ItemGraph& g, std::size_t count, std::size_t max_length,
                         BiasMode start_mode, BiasMode step_mode, std::uint64_t seed,
                         bool strict = false);

// Corpus file: one walk per line, item tokens space-separated; temporal
// walks append "|t1 t2 ..." after the tokens.
void write_walks(const std::vector<Walk>& walks, const Interner& intern, std::ostream& out);

struct TokenWalk {
  std::vector<std::string> tokens;
  std::vector<std::int64_t> times;
};
std::vector<TokenWalk> read_walks(std::istream& in);

}  // namespace dgem
