#include <algorithm>
#include <map>
#include <sstream>

#include "doctest.h"

#include "dgem/item_graph.hpp"
#include "dgem/rng.hpp"

using namespace dgem;

namespace {

// The four-user example: ACEF, BCD, ADFE, BFCE with increasing timestamps.
std::vector<UserSequence> four_user_sequences() {
  const auto seq = [](const std::string& user, const std::string& items) {
    UserSequence s;
    s.user_id = user;
    std::int64_t t = 10;
    for (char c : items) {
      s.items.emplace_back(std::string(1, c), t);
      t += 10;
    }
    return s;
  };
  return {seq("user1", "ACEF"), seq("user2", "BCD"), seq("user3", "ADFE"), seq("user4", "BFCE")};
}

std::map<std::pair<std::string, std::string>, std::uint64_t> edge_map(const ItemGraph& g) {
  std::map<std::pair<std::string, std::string>, std::uint64_t> edges;
  for (std::size_t v = 0; v < g.vertex_count(); ++v) {
    for (const EdgeRecord& rec : g.adj[v]) {
      edges[{g.intern.token(static_cast<VertexId>(v)), g.intern.token(rec.dst)}] = rec.wf;
    }
  }
  return edges;
}

}  // namespace

TEST_CASE("build_static_graph: four-user example edge set") {
  const ItemGraph g = build_static_graph(four_user_sequences());
  const auto edges = edge_map(g);
  const std::map<std::pair<std::string, std::string>, std::uint64_t> expected = {
      {{"A", "C"}, 1}, {{"C", "E"}, 2}, {{"E", "F"}, 1}, {{"B", "C"}, 1}, {{"C", "D"}, 1},
      {{"A", "D"}, 1}, {{"D", "F"}, 1}, {{"F", "E"}, 1}, {{"B", "F"}, 1}, {{"F", "C"}, 1}};
  CHECK(edges == expected);
  // E->F and F->E form the closed loop
  CHECK(edges.count({"E", "F"}));
  CHECK(edges.count({"F", "E"}));
}

TEST_CASE("build_static_graph: empty input gives empty graph") {
  const ItemGraph g = build_static_graph({});
  CHECK(g.vertex_count() == 0);
  CHECK(g.edge_count() == 0);
}

TEST_CASE("build_static_graph: A,B,A yields both directions") {
  UserSequence seq{"u", {{"A", 1}, {"B", 2}, {"A", 3}}};
  const ItemGraph g = build_static_graph({seq});
  const auto edges = edge_map(g);
  CHECK(edges.at({"A", "B"}) == 1);
  CHECK(edges.at({"B", "A"}) == 1);
  CHECK(edges.size() == 2);
}

TEST_CASE("build_dynamic_graph: later timestamp lands in wt") {
  SUBCASE("single pair") {
    UserSequence seq{"u", {{"A", 10}, {"B", 20}}};
    const ItemGraph g = build_dynamic_graph({seq});
    const auto v = g.intern.find("A");
    REQUIRE(v);
    const auto edges = out_edges(g, *v);
    REQUIRE(edges.size() == 1);
    CHECK(edges[0].wf == 1);
    CHECK(edges[0].wt == std::vector<std::int64_t>{20});
  }
  SUBCASE("repeated pair accumulates timestamps") {
    UserSequence seq{"u", {{"A", 10}, {"B", 20}, {"A", 30}, {"B", 40}}};
    const ItemGraph g = build_dynamic_graph({seq});
    const auto a = *g.intern.find("A");
    const auto b = *g.intern.find("B");
    const auto a_edges = out_edges(g, a);
    REQUIRE(a_edges.size() == 1);
    CHECK(a_edges[0].wf == 2);
    CHECK(a_edges[0].wt == std::vector<std::int64_t>{20, 40});
    const auto b_edges = out_edges(g, b);
    REQUIRE(b_edges.size() == 1);
    CHECK(b_edges[0].wf == 1);
    CHECK(b_edges[0].wt == std::vector<std::int64_t>{30});
  }
}

TEST_CASE("build_dynamic_graph: four-user example has |wt(C->E)| == 2") {
  const ItemGraph g = build_dynamic_graph(four_user_sequences());
  const auto c = *g.intern.find("C");
  const auto e = *g.intern.find("E");
  for (const EdgeRecord& rec : out_edges(g, c)) {
    if (rec.dst == e) {
      CHECK(rec.wf == 2);
      CHECK(rec.wt.size() == 2);
      CHECK(std::is_sorted(rec.wt.begin(), rec.wt.end()));
      return;
    }
  }
  FAIL("edge C->E missing");
}

TEST_CASE("out_edges: four-user example, C has D and E") {
  const ItemGraph g = build_static_graph(four_user_sequences());
  const auto c = *g.intern.find("C");
  const auto edges = out_edges(g, c);
  REQUIRE(edges.size() == 2);
  std::map<std::string, std::uint64_t> by_token;
  for (const EdgeRecord& rec : edges) by_token[g.intern.token(rec.dst)] = rec.wf;
  CHECK(by_token.at("E") == 2);
  CHECK(by_token.at("D") == 1);
  // adjacency is sorted by dst index
  CHECK(std::is_sorted(edges.begin(), edges.end(),
                       [](const EdgeRecord& a, const EdgeRecord& b) { return a.dst < b.dst; }));
}

TEST_CASE("out_edges: sink has empty list, out-of-range throws") {
  UserSequence seq{"u", {{"A", 1}, {"B", 2}}};
  const ItemGraph g = build_static_graph({seq});
  const auto b = *g.intern.find("B");
  CHECK(out_edges(g, b).empty());
  CHECK_THROWS_AS(out_edges(g, static_cast<VertexId>(g.vertex_count())), std::out_of_range);
}

TEST_CASE("total_out_weight: example values") {
  const ItemGraph g = build_static_graph(four_user_sequences());
  CHECK(total_out_weight(g, *g.intern.find("C")) == 3);
  CHECK(total_out_weight(g, *g.intern.find("A")) == 2);
  // D has one outgoing edge (D->F); its sink-ness is covered above
  UserSequence seq{"u", {{"X", 1}, {"Y", 2}}};
  const ItemGraph g2 = build_static_graph({seq});
  CHECK(total_out_weight(g2, *g2.intern.find("Y")) == 0);
}

TEST_CASE("graph totals: sum of wf equals sum of |sequence|-1") {
  const auto sequences = four_user_sequences();
  const ItemGraph g = build_static_graph(sequences);
  std::uint64_t expected = 0;
  for (const auto& seq : sequences) {
    if (seq.items.size() > 1) expected += seq.items.size() - 1;
  }
  CHECK(g.total_weight() == expected);
}

TEST_CASE("self-pairs create self-loop edges") {
  UserSequence seq{"u", {{"A", 1}, {"A", 2}}};
  const ItemGraph g = build_static_graph({seq});
  const auto a = *g.intern.find("A");
  const auto edges = out_edges(g, a);
  REQUIRE(edges.size() == 1);
  CHECK(edges[0].dst == a);
}

TEST_CASE("graph construction is independent of user order") {
  auto sequences = four_user_sequences();
  const ItemGraph g1 = build_dynamic_graph(sequences);
  std::reverse(sequences.begin(), sequences.end());
  const ItemGraph g2 = build_dynamic_graph(sequences);
  REQUIRE(g1.vertex_count() == g2.vertex_count());
  for (std::size_t v = 0; v < g1.vertex_count(); ++v) {
    CHECK(g1.intern.token(static_cast<VertexId>(v)) == g2.intern.token(static_cast<VertexId>(v)));
    REQUIRE(g1.adj[v].size() == g2.adj[v].size());
    for (std::size_t i = 0; i < g1.adj[v].size(); ++i) {
      CHECK(g1.adj[v][i].dst == g2.adj[v][i].dst);
      CHECK(g1.adj[v][i].wf == g2.adj[v][i].wf);
      CHECK(g1.adj[v][i].wt == g2.adj[v][i].wt);
    }
  }
}

TEST_CASE("dynamic invariants: |wt| == wf and wt sorted, over random graphs") {
  Rng rng(99);
  for (int trial = 0; trial < 25; ++trial) {
    std::vector<UserSequence> sequences;
    const std::size_t users = 1 + rng.uniform_int(6);
    for (std::size_t u = 0; u < users; ++u) {
      UserSequence seq;
      seq.user_id = "u" + std::to_string(u);
      std::int64_t t = rng.uniform_int(50);
      const std::size_t len = 1 + rng.uniform_int(8);
      for (std::size_t i = 0; i < len; ++i) {
        seq.items.emplace_back("i" + std::to_string(rng.uniform_int(5)), t);
        t += static_cast<std::int64_t>(rng.uniform_int(5));  // ties allowed
      }
      sequences.push_back(std::move(seq));
    }
    const ItemGraph g = build_dynamic_graph(sequences);
    for (std::size_t v = 0; v < g.vertex_count(); ++v) {
      for (const EdgeRecord& rec : g.adj[v]) {
        CHECK(rec.wt.size() == rec.wf);
        CHECK(std::is_sorted(rec.wt.begin(), rec.wt.end()));
      }
    }
  }
}

TEST_CASE("graph serialization round-trips exactly") {
  for (const GraphMode mode : {GraphMode::Static, GraphMode::Dynamic}) {
    const auto sequences = four_user_sequences();
    const ItemGraph g = mode == GraphMode::Static ? build_static_graph(sequences)
                                                  : build_dynamic_graph(sequences);
    std::ostringstream out;
    write_graph(g, out);
    std::istringstream in(out.str());
    const ItemGraph h = read_graph(in);

    CHECK(h.mode == g.mode);
    REQUIRE(h.vertex_count() == g.vertex_count());
    for (std::size_t v = 0; v < g.vertex_count(); ++v) {
      CHECK(h.intern.token(static_cast<VertexId>(v)) ==
            g.intern.token(static_cast<VertexId>(v)));
      REQUIRE(h.adj[v].size() == g.adj[v].size());
      for (std::size_t i = 0; i < g.adj[v].size(); ++i) {
        CHECK(h.adj[v][i].dst == g.adj[v][i].dst);
        CHECK(h.adj[v][i].wf == g.adj[v][i].wf);
        CHECK(h.adj[v][i].wt == g.adj[v][i].wt);
      }
    }
    // and the serialized text itself is stable
    std::ostringstream out2;
    write_graph(h, out2);
    CHECK(out.str() == out2.str());
  }
}

TEST_CASE("read_graph: accepts files without a vertex table") {
  std::istringstream in(
      "DGEM-GRAPH v1 dynamic 3 2\n"
      "# produced elsewhere\n"
      "A\tB\t2\t5,9\n"
      "B\tC\t1\t7\n");
  const ItemGraph g = read_graph(in);
  CHECK(g.vertex_count() == 3);
  CHECK(g.edge_count() == 2);
  const auto a = g.intern.find("A");
  REQUIRE(a);
  REQUIRE(out_edges(g, *a).size() == 1);
  CHECK(out_edges(g, *a)[0].wt == std::vector<std::int64_t>{5, 9});
}

TEST_CASE("read_graph: rejects malformed headers") {
  std::istringstream bad("NOT-A-GRAPH v1 static 0 0\n");
  CHECK_THROWS_AS(read_graph(bad), ParseError);
  std::istringstream bad_counts("DGEM-GRAPH v1 static 5 0\n");
  CHECK_THROWS_AS(read_graph(bad_counts), ParseError);
}
