#include "dgem/walker.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace dgem {

namespace {

constexpr std::uint64_t kWalkTag = 0x77616c6b;     // per-walk streams
constexpr std::uint64_t kShuffleTag = 0x73687566;  // per-pass vertex orders

void require_mode(const ItemGraph& g, GraphMode mode, const char* op) {
  if (g.mode != mode) {
    throw std::invalid_argument(std::string(op) + ": graph mode mismatch");
  }
}

}  // namespace

std::vector<std::pair<VertexId, double>> transition_distribution(const ItemGraph& g,
                                                                 VertexId v, double alpha) {
  require_mode(g, GraphMode::Static, "transition_distribution");
  if (alpha < 0.0 || alpha > 1.0) {
    throw std::invalid_argument("transition_distribution: alpha outside [0,1]");
  }
  const auto edges = out_edges(g, v);
  const std::uint64_t total = total_out_weight(g, v);

  std::vector<std::pair<VertexId, double>> dist;
  if (total == 0) {
    dist.emplace_back(v, 1.0);  // sink: absorbing
    return dist;
  }
  const double w = static_cast<double>(total);
  double stay = 1.0 - alpha;
  bool self_edge_seen = false;
  for (const EdgeRecord& rec : edges) {
    const double p = alpha * static_cast<double>(rec.wf) / w;
    if (rec.dst == v) {
      stay += p;
      self_edge_seen = true;
    } else if (p > 0.0) {
      dist.emplace_back(rec.dst, p);
    }
  }
  if (stay > 0.0 || self_edge_seen) dist.emplace_back(v, stay);
  std::sort(dist.begin(), dist.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  return dist;
}

VertexId sample_next(const ItemGraph& g, VertexId v, double alpha, Rng& rng) {
  const auto dist = transition_distribution(g, v, alpha);
  const double target = rng.uniform();
  double acc = 0.0;
  for (const auto& [vertex, p] : dist) {
    acc += p;
    if (target < acc) return vertex;
  }
  return dist.back().first;
}

WalkBatch static_walks(const ItemGraph& g, const StaticWalkConfig& cfg) {
  require_mode(g, GraphMode::Static, "static_walks");
  if (cfg.walk_length < 2) throw std::invalid_argument("static_walks: walk_length < 2");
  if (cfg.walks_per_vertex < 1) throw std::invalid_argument("static_walks: walks_per_vertex < 1");
  if (cfg.alpha < 0.0 || cfg.alpha > 1.0) throw std::invalid_argument("static_walks: alpha outside [0,1]");

  WalkBatch batch;
  const std::size_t n = g.vertex_count();
  if (n == 0) return batch;
  batch.walks.reserve(n * cfg.walks_per_vertex);

  std::vector<VertexId> order(n);
  std::iota(order.begin(), order.end(), 0);
  for (std::size_t pass = 0; pass < cfg.walks_per_vertex; ++pass) {
    Rng shuffle_rng = Rng::stream(cfg.seed, kShuffleTag, pass);
    shuffle_rng.shuffle(order);
    for (std::size_t pos = 0; pos < n; ++pos) {
      Rng rng = Rng::stream(cfg.seed, kWalkTag, pass * n + pos);
      Walk walk;
      walk.vertices.push_back(order[pos]);
      while (walk.vertices.size() < cfg.walk_length) {
        const VertexId cur = walk.vertices.back();
        if (total_out_weight(g, cur) == 0) break;  // sink absorbs
        walk.vertices.push_back(sample_next(g, cur, cfg.alpha, rng));
      }
      if (walk.vertices.size() >= 2) {
        batch.walks.push_back(std::move(walk));
      } else {
        ++batch.discarded_short;
      }
    }
  }
  return batch;
}

std::vector<double> bias_probabilities(std::span<const double> ascending_times, BiasMode mode) {
  const std::size_t k = ascending_times.size();
  if (k == 0) throw std::invalid_argument("bias_probabilities: empty candidate set");
  std::vector<double> probs(k);
  switch (mode) {
    case BiasMode::Uniform: {
      std::fill(probs.begin(), probs.end(), 1.0 / static_cast<double>(k));
      break;
    }
    case BiasMode::Exponential: {
      // exp(t - ref) normalized; the reference shift cancels, so subtract the
      // maximum to avoid overflow on raw UnixTime values.
      const double max_t = *std::max_element(ascending_times.begin(), ascending_times.end());
      double total = 0.0;
      for (std::size_t i = 0; i < k; ++i) {
        probs[i] = std::exp(ascending_times[i] - max_t);
        total += probs[i];
      }
      for (double& p : probs) p /= total;
      break;
    }
    case BiasMode::Linear: {
      // ascending-time rank, 1 = earliest
      const double total = static_cast<double>(k) * static_cast<double>(k + 1) / 2.0;
      for (std::size_t i = 0; i < k; ++i) probs[i] = static_cast<double>(i + 1) / total;
      break;
    }
  }
  return probs;
}

std::vector<TemporalEdgeInstance> temporal_instances(const ItemGraph& g) {
  require_mode(g, GraphMode::Dynamic, "temporal_instances");
  std::vector<TemporalEdgeInstance> instances;
  for (std::size_t v = 0; v < g.vertex_count(); ++v) {
    for (const EdgeRecord& rec : g.adj[v]) {
      for (std::int64_t t : rec.wt) {
        instances.push_back({static_cast<VertexId>(v), rec.dst, t});
      }
    }
  }
  std::stable_sort(instances.begin(), instances.end(),
                   [](const TemporalEdgeInstance& a, const TemporalEdgeInstance& b) {
                     if (a.t != b.t) return a.t < b.t;
                     if (a.src != b.src) return a.src < b.src;
                     return a.dst < b.dst;
                   });
  return instances;
}

std::vector<TemporalEdgeInstance> temporal_candidates(const ItemGraph& g,
                                                      const TemporalEdgeInstance& cur,
                                                      bool strict) {
  require_mode(g, GraphMode::Dynamic, "temporal_candidates");
  std::vector<TemporalEdgeInstance> candidates;
  for (const EdgeRecord& rec : out_edges(g, cur.dst)) {
    auto it = strict ? std::upper_bound(rec.wt.begin(), rec.wt.end(), cur.t)
                     : std::lower_bound(rec.wt.begin(), rec.wt.end(), cur.t);
    for (; it != rec.wt.end(); ++it) {
      candidates.push_back({cur.dst, rec.dst, *it});
    }
  }
  std::stable_sort(candidates.begin(), candidates.end(),
                   [](const TemporalEdgeInstance& a, const TemporalEdgeInstance& b) {
                     if (a.t != b.t) return a.t < b.t;
                     return a.dst < b.dst;
                   });
  return candidates;
}

namespace {

TemporalEdgeInstance draw_instance(const std::vector<TemporalEdgeInstance>& pool,
                                   BiasMode mode, Rng& rng) {
  std::vector<double> times(pool.size());
  for (std::size_t i = 0; i < pool.size(); ++i) times[i] = static_cast<double>(pool[i].t);
  const std::vector<double> probs = bias_probabilities(times, mode);
  const double target = rng.uniform();
  double acc = 0.0;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    acc += probs[i];
    if (target < acc) return pool[i];
  }
  return pool.back();
}

}  // namespace

TemporalEdgeInstance sample_start_edge(const ItemGraph& g, BiasMode mode, Rng& rng) {
  const auto instances = temporal_instances(g);
  if (instances.empty()) {
    throw std::invalid_argument("sample_start_edge: graph has no temporal edge instances");
  }
  return draw_instance(instances, mode, rng);
}

std::optional<TemporalEdgeInstance> temporal_next(const ItemGraph& g,
                                                  const TemporalEdgeInstance& cur,
                                                  BiasMode mode, Rng& rng, bool strict) {
  const auto candidates = temporal_candidates(g, cur, strict);
  if (candidates.empty()) return std::nullopt;
  return draw_instance(candidates, mode, rng);
}

WalkBatch temporal_walks(const ItemGraph& g, std::size_t count, std::size_t max_length,
                         BiasMode start_mode, BiasMode step_mode, std::uint64_t seed,
                         bool strict) {
  require_mode(g, GraphMode::Dynamic, "temporal_walks");
  if (max_length < 2) throw std::invalid_argument("temporal_walks: max_length < 2");
  const auto instances = temporal_instances(g);
  if (instances.empty()) {
    throw std::invalid_argument("temporal_walks: graph has no temporal edge instances");
  }

  WalkBatch batch;
  batch.walks.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    Rng rng = Rng::stream(seed, kWalkTag, i);
    TemporalEdgeInstance cur = draw_instance(instances, start_mode, rng);
    Walk walk;
    walk.vertices = {cur.src, cur.dst};
    walk.times = {cur.t};
    while (walk.vertices.size() < max_length) {
      const auto next = temporal_next(g, cur, step_mode, rng, strict);
      if (!next) break;
      cur = *next;
      walk.vertices.push_back(cur.dst);
      walk.times.push_back(cur.t);
    }
    batch.walks.push_back(std::move(walk));
  }
  return batch;
}

void write_walks(const std::vector<Walk>& walks, const Interner& intern, std::ostream& out) {
  for (const Walk& walk : walks) {
    for (std::size_t i = 0; i < walk.vertices.size(); ++i) {
      if (i) out << ' ';
      out << intern.token(walk.vertices[i]);
    }
    if (walk.temporal()) {
      out << " |";
      for (std::size_t i = 0; i < walk.times.size(); ++i) {
        if (i) out << ' ';
        out << walk.times[i];
      }
    }
    out << '\n';
  }
}

std::vector<TokenWalk> read_walks(std::istream& in) {
  std::vector<TokenWalk> walks;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    TokenWalk walk;
    const std::size_t bar = line.find('|');
    std::istringstream tokens(line.substr(0, bar));
    std::string tok;
    while (tokens >> tok) walk.tokens.push_back(tok);
    if (bar != std::string::npos) {
      std::istringstream times(line.substr(bar + 1));
      std::int64_t t = 0;
      while (times >> t) walk.times.push_back(t);
      if (times.fail() && !times.eof()) throw ParseError(line_no, "bad timestamp");
      if (walk.times.size() + 1 != walk.tokens.size()) {
        throw ParseError(line_no, "timestamp count does not match walk length");
      }
    }
    if (walk.tokens.empty()) continue;
    walks.push_back(std::move(walk));
  }
  return walks;
}

}  // namespace dgem
