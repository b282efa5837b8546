#include "dgem/item_graph.hpp"

#include <algorithm>
#include <charconv>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

namespace dgem {

namespace {

ItemGraph build_graph(const std::vector<UserSequence>& sequences, GraphMode mode) {
  ItemGraph g;
  g.mode = mode;

  // Sorted interning keeps the graph identical under any user order.
  std::set<std::string> tokens;
  for (const UserSequence& seq : sequences) {
    for (const auto& [item, t] : seq.items) tokens.insert(item);
  }
  for (const std::string& token : tokens) g.intern.intern(token);
  g.adj.resize(g.intern.size());

  std::vector<std::map<VertexId, EdgeRecord>> edges(g.intern.size());
  for (const UserSequence& seq : sequences) {
    for (std::size_t i = 0; i + 1 < seq.items.size(); ++i) {
      const VertexId src = *g.intern.find(seq.items[i].first);
      const VertexId dst = *g.intern.find(seq.items[i + 1].first);
      EdgeRecord& rec = edges[src][dst];
      rec.dst = dst;
      ++rec.wf;
      if (mode == GraphMode::Dynamic) rec.wt.push_back(seq.items[i + 1].second);
    }
  }
  for (std::size_t v = 0; v < edges.size(); ++v) {
    g.adj[v].reserve(edges[v].size());
    for (auto& [dst, rec] : edges[v]) {
      std::sort(rec.wt.begin(), rec.wt.end());
      g.adj[v].push_back(std::move(rec));
    }
  }
  return g;
}

}  // namespace

std::size_t ItemGraph::edge_count() const {
  std::size_t m = 0;
  for (const auto& list : adj) m += list.size();
  return m;
}

std::uint64_t ItemGraph::total_weight() const {
  std::uint64_t w = 0;
  for (const auto& list : adj) {
    for (const EdgeRecord& rec : list) w += rec.wf;
  }
  return w;
}

std::uint64_t ItemGraph::instance_count() const { return total_weight(); }

ItemGraph build_static_graph(const std::vector<UserSequence>& sequences) {
  return build_graph(sequences, GraphMode::Static);
}

ItemGraph build_dynamic_graph(const std::vector<UserSequence>& sequences) {
  return build_graph(sequences, GraphMode::Dynamic);
}

std::span<const EdgeRecord> out_edges(const ItemGraph& g, VertexId v) {
  if (v >= g.adj.size()) {
    throw std::out_of_range("out_edges: vertex " + std::to_string(v) + " out of range");
  }
  return g.adj[v];
}

std::uint64_t total_out_weight(const ItemGraph& g, VertexId v) {
  std::uint64_t w = 0;
  for (const EdgeRecord& rec : out_edges(g, v)) w += rec.wf;
  return w;
}

void write_graph(const ItemGraph& g, std::ostream& out) {
  out << "DGEM-GRAPH v1 " << (g.mode == GraphMode::Static ? "static" : "dynamic") << ' '
      << g.vertex_count() << ' ' << g.edge_count() << '\n';
  for (std::size_t v = 0; v < g.vertex_count(); ++v) {
    out << "# vertex " << v << ' ' << g.intern.token(static_cast<VertexId>(v)) << '\n';
  }
  for (std::size_t v = 0; v < g.vertex_count(); ++v) {
    for (const EdgeRecord& rec : g.adj[v]) {
      out << g.intern.token(static_cast<VertexId>(v)) << '\t' << g.intern.token(rec.dst)
          << '\t' << rec.wf;
      if (g.mode == GraphMode::Dynamic) {
        out << '\t';
        for (std::size_t i = 0; i < rec.wt.size(); ++i) {
          if (i) out << ',';
          out << rec.wt[i];
        }
      }
      out << '\n';
    }
  }
}

namespace {

std::vector<std::string_view> split_tabs(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = s.find('\t', start);
    if (pos == std::string_view::npos) {
      out.push_back(s.substr(start));
      break;
    }
    out.push_back(s.substr(start, pos - start));
    start = pos + 1;
  }
  return out;
}

template <typename T>
T parse_number(std::string_view s, std::size_t line, const char* what) {
  T value{};
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc{} || ptr != s.data() + s.size()) {
    throw ParseError(line, std::string("bad ") + what);
  }
  return value;
}

std::string_view strip_cr(std::string_view s) {
  if (!s.empty() && s.back() == '\r') s.remove_suffix(1);
  return s;
}

}  // namespace

ItemGraph read_graph(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  if (!std::getline(in, line)) throw ParseError(1, "missing header");
  ++line_no;
  std::istringstream header(line);
  std::string magic, version, mode_str;
  std::size_t n = 0, m = 0;
  header >> magic >> version >> mode_str >> n >> m;
  if (magic != "DGEM-GRAPH" || version != "v1" || header.fail()) {
    throw ParseError(1, "bad graph header");
  }
  ItemGraph g;
  if (mode_str == "static") {
    g.mode = GraphMode::Static;
  } else if (mode_str == "dynamic") {
    g.mode = GraphMode::Dynamic;
  } else {
    throw ParseError(1, "unknown graph mode '" + mode_str + "'");
  }

  struct PendingEdge {
    std::string src, dst;
    std::uint64_t wf;
    std::vector<std::int64_t> wt;
    std::size_t line;
  };
  std::vector<PendingEdge> pending;
  std::vector<std::pair<std::size_t, std::string>> vertex_table;

  while (std::getline(in, line)) {
    ++line_no;
    std::string_view sv = strip_cr(line);
    if (sv.empty()) continue;
    if (sv.front() == '#') {
      std::istringstream cs{std::string(sv)};
      std::string hash, kw;
      cs >> hash >> kw;
      if (kw == "vertex") {
        std::size_t id = 0;
        std::string token;
        cs >> id >> token;
        if (!cs.fail() && !token.empty()) vertex_table.emplace_back(id, token);
      }
      continue;
    }
    const auto fields = split_tabs(sv);
    const std::size_t expected = g.mode == GraphMode::Dynamic ? 4 : 3;
    if (fields.size() < expected) throw ParseError(line_no, "expected " + std::to_string(expected) + " fields");
    PendingEdge e;
    e.src = std::string(fields[0]);
    e.dst = std::string(fields[1]);
    e.wf = parse_number<std::uint64_t>(fields[2], line_no, "weight");
    if (e.wf == 0) throw ParseError(line_no, "zero weight");
    if (g.mode == GraphMode::Dynamic) {
      std::string_view ts = fields[3];
      std::size_t start = 0;
      while (start <= ts.size()) {
        const std::size_t pos = ts.find(',', start);
        const std::string_view part =
            pos == std::string_view::npos ? ts.substr(start) : ts.substr(start, pos - start);
        if (!part.empty()) e.wt.push_back(parse_number<std::int64_t>(part, line_no, "timestamp"));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
      }
      if (e.wt.size() != e.wf) throw ParseError(line_no, "timestamp count does not match weight");
    }
    e.line = line_no;
    pending.push_back(std::move(e));
  }

  if (!vertex_table.empty()) {
    std::sort(vertex_table.begin(), vertex_table.end());
    for (std::size_t i = 0; i < vertex_table.size(); ++i) {
      if (vertex_table[i].first != i) throw ParseError(1, "vertex table ids not dense");
      g.intern.intern(vertex_table[i].second);
    }
  } else {
    for (const PendingEdge& e : pending) {
      g.intern.intern(e.src);
      g.intern.intern(e.dst);
    }
  }
  if (g.intern.size() != n) throw ParseError(1, "header vertex count does not match body");
  if (pending.size() != m) throw ParseError(1, "header edge count does not match body");

  g.adj.resize(g.intern.size());
  for (PendingEdge& e : pending) {
    const auto src = g.intern.find(e.src);
    const auto dst = g.intern.find(e.dst);
    if (!src || !dst) throw ParseError(e.line, "edge references unknown vertex");
    EdgeRecord rec;
    rec.dst = *dst;
    rec.wf = e.wf;
    rec.wt = std::move(e.wt);
    std::sort(rec.wt.begin(), rec.wt.end());
    g.adj[*src].push_back(std::move(rec));
  }
  for (auto& list : g.adj) {
    std::sort(list.begin(), list.end(),
              [](const EdgeRecord& a, const EdgeRecord& b) { return a.dst < b.dst; });
    for (std::size_t i = 1; i < list.size(); ++i) {
      if (list[i].dst == list[i - 1].dst) throw ParseError(1, "duplicate edge");
    }
  }
  return g;
}

}  // namespace dgem
