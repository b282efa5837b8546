#include <algorithm>
#include <map>
#include <set>

#include "doctest.h"

#include "dgem/harness.hpp"

using namespace dgem;

namespace {

PipelineConfig desk_config(GraphMode mode) {
  PipelineConfig cfg;
  cfg.seed = 7;
  cfg.mode = mode;
  cfg.walk.length = 8;
  cfg.walk.per_vertex = 3;
  cfg.embed.dim = 8;
  cfg.embed.window = 3;
  cfg.embed.negatives = 3;
  cfg.embed.epochs = 2;
  cfg.rank.hidden = {8, 6};
  cfg.rank.attention_hidden = 6;
  cfg.rank.dropout = 0.2;
  cfg.rank.epochs = 2;
  cfg.rank.max_history = 6;
  cfg.eval.min_activity = 1;
  return cfg;
}

SynthResult small_dataset() { return synth_dataset(60, 30, 6, 8, 0.1, 3); }

}  // namespace

TEST_CASE("holdout_dynamic: ceiling rule on 9 events") {
  std::vector<Event> events;
  for (int i = 0; i < 9; ++i) events.push_back({"u", "i" + std::to_string(i), i});
  const auto [train, held] = holdout_dynamic(events, 1.0 / 3.0);
  CHECK(train.size() == 6);
  CHECK(held.size() == 3);
  // the three latest
  for (const Event& ev : held) CHECK(ev.timestamp >= 6);
}

TEST_CASE("holdout_dynamic: ties at the cut resolve by input order") {
  std::vector<Event> events;
  for (int i = 0; i < 6; ++i) events.push_back({"u", "i" + std::to_string(i), 42});
  const auto [train, held] = holdout_dynamic(events, 1.0 / 3.0);
  REQUIRE(held.size() == 2);
  CHECK(held[0].item_id == "i4");
  CHECK(held[1].item_id == "i5");
  REQUIRE(train.size() == 4);
  CHECK(train[0].item_id == "i0");
}

TEST_CASE("holdout_dynamic: preserves the event multiset") {
  std::vector<Event> events;
  for (int i = 0; i < 57; ++i) {
    events.push_back({"u" + std::to_string(i % 5), "i" + std::to_string(i % 7), (i * 13) % 29});
  }
  const auto [train, held] = holdout_dynamic(events, 0.4);
  CHECK(train.size() + held.size() == events.size());
  std::multiset<std::string> before, after;
  for (const Event& ev : events) before.insert(ev.user_id + "/" + ev.item_id + "/" + std::to_string(ev.timestamp));
  for (const Event& ev : train) after.insert(ev.user_id + "/" + ev.item_id + "/" + std::to_string(ev.timestamp));
  for (const Event& ev : held) after.insert(ev.user_id + "/" + ev.item_id + "/" + std::to_string(ev.timestamp));
  CHECK(before == after);
  // held-out events are the latest
  std::int64_t max_train = -1;
  for (const Event& ev : train) max_train = std::max(max_train, ev.timestamp);
  for (const Event& ev : held) CHECK(ev.timestamp >= max_train);
}

TEST_CASE("holdout_dynamic: fewer than 2 events is an error") {
  CHECK_THROWS_AS(holdout_dynamic({{"u", "i", 1}}, 0.5), std::invalid_argument);
}

TEST_CASE("synth_dataset: noise 0 keeps every user inside one cluster") {
  const auto data = synth_dataset(20, 24, 4, 6, 0.0, 9);
  // map item -> cluster token
  std::map<std::string, std::string> cluster_of;
  for (const MetadataRow& row : data.metadata) cluster_of[row.item_id] = row.aux.at(0);
  std::map<std::string, std::set<std::string>> clusters_per_user;
  for (const Event& ev : data.events) clusters_per_user[ev.user_id].insert(cluster_of[ev.item_id]);
  for (const auto& [user, clusters] : clusters_per_user) CHECK(clusters.size() == 1);
}

TEST_CASE("synth_dataset: deterministic and strictly increasing per user") {
  const auto a = synth_dataset(10, 12, 3, 5, 0.2, 4);
  const auto b = synth_dataset(10, 12, 3, 5, 0.2, 4);
  REQUIRE(a.events.size() == b.events.size());
  for (std::size_t i = 0; i < a.events.size(); ++i) {
    CHECK(a.events[i].user_id == b.events[i].user_id);
    CHECK(a.events[i].item_id == b.events[i].item_id);
    CHECK(a.events[i].timestamp == b.events[i].timestamp);
  }
  std::map<std::string, std::int64_t> last;
  for (const Event& ev : a.events) {
    if (last.count(ev.user_id)) CHECK(ev.timestamp > last[ev.user_id]);
    last[ev.user_id] = ev.timestamp;
  }
}

TEST_CASE("synth_dataset: parameter validation") {
  CHECK_THROWS_AS(synth_dataset(10, 10, 3, 5, 0.1, 1), std::invalid_argument);  // 3 !| 10
  CHECK_THROWS_AS(synth_dataset(10, 10, 2, 5, 1.0, 1), std::invalid_argument);  // noise = 1
  CHECK_THROWS_AS(synth_dataset(0, 10, 2, 5, 0.1, 1), std::invalid_argument);
}

TEST_CASE("synth_dataset: noise 0.1 keeps most consecutive pairs intra-cluster") {
  double intra = 0.0, total = 0.0;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const auto data = synth_dataset(40, 20, 4, 10, 0.1, seed);
    std::map<std::string, std::string> cluster_of;
    for (const MetadataRow& row : data.metadata) cluster_of[row.item_id] = row.aux.at(0);
    const auto sequences = build_sequences(data.events);
    for (const auto& seq : sequences) {
      for (std::size_t i = 1; i < seq.items.size(); ++i) {
        total += 1.0;
        if (cluster_of[seq.items[i - 1].first] == cluster_of[seq.items[i].first]) intra += 1.0;
      }
    }
  }
  CHECK(intra / total >= 0.85);
}

TEST_CASE("config: unknown keys are rejected") {
  nlohmann::json j = {{"seed", 1}, {"walk", {{"lenght", 12}}}};
  CHECK_THROWS_AS(PipelineConfig::from_json(j), ConfigError);
  nlohmann::json top = {{"sead", 1}};
  CHECK_THROWS_AS(PipelineConfig::from_json(top), ConfigError);
}

TEST_CASE("config: out-of-range values are rejected before any stage runs") {
  nlohmann::json j = {{"walk", {{"length", 1}}}};
  CHECK_THROWS_AS(PipelineConfig::from_json(j), ConfigError);
  nlohmann::json j2 = {{"rank", {{"dropout", 1.0}}}};
  CHECK_THROWS_AS(PipelineConfig::from_json(j2), ConfigError);
}

TEST_CASE("config: defaults materialize in the echo and round-trip") {
  const PipelineConfig cfg = PipelineConfig::from_json(nlohmann::json::object());
  const auto echo = cfg.to_json();
  CHECK(echo["walk"]["length"] == 12);
  CHECK(echo["walk"]["per_vertex"] == 20);
  CHECK(echo["embed"]["dim"] == 180);
  CHECK(echo["embed"]["window"] == 20);
  CHECK(echo["rank"]["dropout"] == 0.5);
  const PipelineConfig back = PipelineConfig::from_json(echo);
  CHECK(back.to_json() == echo);
}

TEST_CASE("run_static: produces metrics and is byte-deterministic") {
  const auto data = small_dataset();
  const PipelineConfig cfg = desk_config(GraphMode::Static);
  const RunReport r1 = run_static(cfg, data.events, data.metadata);
  CHECK(r1.metrics.auc > 0.0);
  CHECK(r1.metrics.auc < 1.0);
  CHECK(r1.metrics.users_included > 0);

  const RunReport r2 = run_static(cfg, data.events, data.metadata);
  CHECK(r1.metrics_json().dump() == r2.metrics_json().dump());
  CHECK(r1.to_json(false).dump() == r2.to_json(false).dump());
}

TEST_CASE("run_static: invalid walk length fails validation before any stage") {
  const auto data = small_dataset();
  PipelineConfig cfg = desk_config(GraphMode::Static);
  cfg.walk.length = 1;
  CHECK_THROWS_AS(run_static(cfg, data.events, data.metadata), ConfigError);
}

TEST_CASE("run_static: mode mismatch is a config error") {
  const auto data = small_dataset();
  CHECK_THROWS_AS(run_static(desk_config(GraphMode::Dynamic), data.events, data.metadata),
                  ConfigError);
  CHECK_THROWS_AS(run_dynamic(desk_config(GraphMode::Static), data.events, data.metadata),
                  ConfigError);
}

TEST_CASE("run_dynamic: embeds solitary items and keeps walks time-ordered") {
  auto data = small_dataset();
  // phantom metadata-only items exercise the cold-start path
  data.metadata.push_back({"ghost1", {"c0", "c1"}});
  data.metadata.push_back({"ghost2", {"c2"}});
  const PipelineConfig cfg = desk_config(GraphMode::Dynamic);
  const RunReport report = run_dynamic(cfg, data.events, data.metadata);

  const std::size_t solitary = report.counts["solitary_items"].get<std::size_t>();
  CHECK(solitary >= 2);  // the ghosts, plus any item pushed out by the holdout
  CHECK(report.counts["solitary_embedded"].get<std::size_t>() == solitary);
  CHECK(report.walk_stats["time_ordered"] == report.walk_stats["generated"]);
  CHECK(report.counts["events_held_out"].get<std::size_t>() > 0);
  CHECK(report.metrics.auc > 0.0);
}

TEST_CASE("sweep: one row per value, validation errors surface") {
  const auto data = small_dataset();
  PipelineConfig cfg = desk_config(GraphMode::Static);
  cfg.rank.epochs = 1;
  cfg.embed.epochs = 1;
  const SweepResult result =
      sweep(cfg, SweepAxis::Dropout, {0.3, 0.5, 0.7}, data.events, data.metadata);
  REQUIRE(result.rows.size() == 3);
  CHECK(result.rows[0].value == 0.3);
  CHECK(result.rows[2].value == 0.7);
  CHECK(result.gauc_nondecreasing_steps <= 2);

  CHECK_THROWS_AS(sweep(cfg, SweepAxis::Dropout, {}, data.events, data.metadata), ConfigError);
  CHECK_THROWS_AS(sweep(cfg, SweepAxis::Dropout, {1.5}, data.events, data.metadata), ConfigError);
  CHECK_THROWS_AS(sweep(cfg, SweepAxis::WalkLength, {1.0}, data.events, data.metadata),
                  ConfigError);
}

TEST_CASE("sweep: walk_length axis reaches the walker") {
  const auto data = small_dataset();
  PipelineConfig cfg = desk_config(GraphMode::Static);
  cfg.rank.epochs = 1;
  cfg.embed.epochs = 1;
  const SweepResult result =
      sweep(cfg, SweepAxis::WalkLength, {2, 6}, data.events, data.metadata);
  REQUIRE(result.rows.size() == 2);
  for (const SweepRow& row : result.rows) {
    CHECK(row.auc > 0.0);
    CHECK(row.auc < 1.0);
  }
}

TEST_CASE("repeat_and_average: aggregation semantics") {
  const auto data = small_dataset();
  PipelineConfig cfg = desk_config(GraphMode::Static);
  cfg.rank.epochs = 1;
  cfg.embed.epochs = 1;

  SUBCASE("one run: mean equals the run, zero spread") {
    const RepeatResult r = repeat_and_average(cfg, 1, true, data.events, data.metadata);
    REQUIRE(r.reports.size() == 1);
    CHECK(r.auc_mean == r.reports[0].metrics.auc);
    CHECK(r.auc_std == 0.0);
  }
  SUBCASE("fixed seed repeats: zero spread for any run count") {
    const RepeatResult r = repeat_and_average(cfg, 3, false, data.events, data.metadata);
    REQUIRE(r.reports.size() == 3);
    CHECK(r.auc_std == 0.0);
    CHECK(r.gauc_std == 0.0);
  }
  SUBCASE("varied seeds: all underlying reports retained") {
    const RepeatResult r = repeat_and_average(cfg, 3, true, data.events, data.metadata);
    REQUIRE(r.reports.size() == 3);
    for (const RunReport& report : r.reports) {
      CHECK(report.metrics.auc > 0.0);
    }
  }
}
