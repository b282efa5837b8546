#include "dgem/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

#include "dgem/embedder.hpp"
#include "dgem/item_graph.hpp"
#include "dgem/ranker.hpp"
#include "dgem/rng.hpp"
#include "dgem/walker.hpp"

namespace dgem {

namespace {

constexpr std::uint64_t kSynthTag = 0x73796e74;
constexpr std::uint64_t kSampleTag = 0x73616d70;
constexpr std::uint64_t kRepeatTag = 0x72657065;

class StageClock {
 public:
  void start() { begin_ = std::chrono::steady_clock::now(); }
  double stop() {
    const auto end = std::chrono::steady_clock::now();
    return std::chrono::duration<double, std::milli>(end - begin_).count();
  }

 private:
  std::chrono::steady_clock::time_point begin_;
};

}  // namespace

SynthResult synth_dataset(std::size_t n_users, std::size_t n_items, std::size_t n_clusters,
                          std::size_t events_per_user, double noise, std::uint64_t seed) {
  if (n_users == 0 || n_items == 0 || n_clusters == 0 || events_per_user == 0) {
    throw std::invalid_argument("synth_dataset: zero-sized parameter");
  }
  if (n_items % n_clusters != 0) {
    throw std::invalid_argument("synth_dataset: n_clusters must divide n_items");
  }
  if (noise < 0.0 || noise >= 1.0) {
    throw std::invalid_argument("synth_dataset: noise outside [0,1)");
  }

  const std::size_t cluster_size = n_items / n_clusters;
  const auto item_name = [](std::size_t i) { return "i" + std::to_string(i); };

  SynthResult result;
  result.events.reserve(n_users * events_per_user);
  Rng rng = Rng::stream(seed, kSynthTag, 0);
  for (std::size_t u = 0; u < n_users; ++u) {
    const std::size_t home = rng.uniform_int(n_clusters);
    std::int64_t t = static_cast<std::int64_t>(rng.uniform_int(1000));
    for (std::size_t e = 0; e < events_per_user; ++e) {
      std::size_t item;
      if (rng.uniform() < noise) {
        item = rng.uniform_int(n_items);
      } else {
        item = home * cluster_size + rng.uniform_int(cluster_size);
      }
      result.events.push_back({"u" + std::to_string(u), item_name(item), t});
      t += 1 + static_cast<std::int64_t>(rng.uniform_int(10));
    }
  }
  result.metadata.reserve(n_items);
  for (std::size_t i = 0; i < n_items; ++i) {
    result.metadata.push_back({item_name(i), {"c" + std::to_string(i / cluster_size)}});
  }
  return result;
}

std::pair<std::vector<Event>, std::vector<Event>> holdout_dynamic(
    const std::vector<Event>& events, double fraction) {
  if (events.size() < 2) throw std::invalid_argument("holdout_dynamic: fewer than 2 events");
  if (fraction <= 0.0 || fraction >= 1.0) {
    throw std::invalid_argument("holdout_dynamic: fraction outside (0,1)");
  }
  std::vector<Event> sorted = events;
  std::stable_sort(sorted.begin(), sorted.end(),
                   [](const Event& a, const Event& b) { return a.timestamp < b.timestamp; });
  const std::size_t held =
      static_cast<std::size_t>(std::ceil(fraction * static_cast<double>(sorted.size())));
  const std::size_t cut = sorted.size() - held;
  std::vector<Event> train(sorted.begin(), sorted.begin() + cut);
  std::vector<Event> held_out(sorted.begin() + cut, sorted.end());
  return {std::move(train), std::move(held_out)};
}

nlohmann::ordered_json RunReport::metrics_json() const {
  nlohmann::ordered_json j;
  j["auc"] = metrics.auc;
  j["gauc"] = metrics.gauc;
  j["n_users_included"] = metrics.users_included;
  j["n_users_excluded"] = metrics.users_excluded;
  if (metrics.rela_impr_vs_baseline) j["rela_impr_vs_baseline"] = *metrics.rela_impr_vs_baseline;
  return j;
}

nlohmann::ordered_json RunReport::to_json(bool include_timings) const {
  nlohmann::ordered_json j;
  j["config"] = config_echo;
  j["metrics"] = metrics_json();
  j["graph"] = graph_stats;
  j["walks"] = walk_stats;
  j["counts"] = counts;
  if (include_timings) j["timings_ms"] = timings_ms;
  return j;
}

namespace {

RunReport run_pipeline(const PipelineConfig& cfg, const std::vector<Event>& raw_events,
                       const std::vector<MetadataRow>& metadata) {
  cfg.validate();
  RunReport report;
  report.config_echo = cfg.to_json();
  StageClock clock;

  // corpus
  clock.start();
  const ActivityFilterResult filtered = filter_min_activity(raw_events, cfg.eval.min_activity);
  std::vector<Event> events = filtered.events;
  std::vector<Event> held_out;
  if (cfg.mode == GraphMode::Dynamic) {
    auto [train, held] = holdout_dynamic(events, cfg.eval.holdout_fraction);
    events = std::move(train);
    held_out = std::move(held);
  }
  const std::vector<UserSequence> sequences = build_sequences(events);
  const Catalog catalog = build_catalog(events, metadata);
  report.timings_ms["corpus"] = clock.stop();

  report.counts["events_in"] = raw_events.size();
  report.counts["events_filtered_out"] = filtered.dropped_events;
  report.counts["events_held_out"] = held_out.size();
  report.counts["events_used"] = events.size();
  report.counts["users"] = sequences.size();
  report.counts["items"] = catalog.items.size();
  report.counts["solitary_items"] = catalog.solitary.size();
  report.counts["duplicate_metadata_dropped"] = catalog.duplicate_metadata_dropped;

  // graph
  clock.start();
  const ItemGraph graph = cfg.mode == GraphMode::Static ? build_static_graph(sequences)
                                                        : build_dynamic_graph(sequences);
  report.timings_ms["graph"] = clock.stop();
  report.graph_stats["mode"] = cfg.mode == GraphMode::Static ? "static" : "dynamic";
  report.graph_stats["vertices"] = graph.vertex_count();
  report.graph_stats["edges"] = graph.edge_count();
  report.graph_stats["total_weight"] = graph.total_weight();
  if (cfg.mode == GraphMode::Dynamic) {
    report.graph_stats["temporal_instances"] = graph.instance_count();
  }
  if (graph.vertex_count() == 0) {
    throw std::invalid_argument("pipeline: no graph vertices after filtering (stage graph)");
  }

  // walks
  clock.start();
  WalkBatch walks;
  if (cfg.mode == GraphMode::Static) {
    StaticWalkConfig wcfg;
    wcfg.walk_length = cfg.walk.length;
    wcfg.walks_per_vertex = cfg.walk.per_vertex;
    wcfg.alpha = cfg.walk.alpha;
    wcfg.seed = cfg.seed;
    walks = static_walks(graph, wcfg);
  } else {
    const std::size_t count =
        cfg.walk.count > 0 ? cfg.walk.count : cfg.walk.per_vertex * graph.vertex_count();
    walks = temporal_walks(graph, count, cfg.walk.length, cfg.walk.start_bias,
                           cfg.walk.step_bias, cfg.seed, cfg.walk.strict_time);
  }
  report.timings_ms["walks"] = clock.stop();
  report.walk_stats["generated"] = walks.walks.size();
  report.walk_stats["discarded_short"] = walks.discarded_short;
  std::size_t tokens = 0;
  std::size_t nondecreasing = 0;
  for (const Walk& walk : walks.walks) {
    tokens += walk.vertices.size();
    if (walk.temporal() && std::is_sorted(walk.times.begin(), walk.times.end())) ++nondecreasing;
  }
  report.walk_stats["tokens"] = tokens;
  if (cfg.mode == GraphMode::Dynamic) {
    report.walk_stats["time_ordered"] = nondecreasing;  // should equal generated
  }
  if (walks.walks.empty()) {
    throw std::invalid_argument("pipeline: walk corpus is empty (stage walks)");
  }

  // embeddings
  clock.start();
  EmbedConfig ecfg = cfg.embed;
  ecfg.seed = cfg.seed;
  const EmbedResult embedded = train_embeddings(walks.walks, graph.vertex_count(), ecfg);
  const auto aux = aux_token_embeddings(embedded.matrix, graph.intern, catalog);
  const auto item_vectors = embed_catalog(embedded.matrix, graph.intern, catalog, aux);
  report.timings_ms["embed"] = clock.stop();
  report.counts["embedded_items"] = item_vectors.size();
  std::size_t solitary_embedded = 0;
  for (const std::string& item : catalog.solitary) {
    if (item_vectors.count(item)) ++solitary_embedded;
  }
  report.counts["solitary_embedded"] = solitary_embedded;

  // training samples
  clock.start();
  Rng sample_rng = Rng::stream(cfg.seed, kSampleTag, 0);
  const SampleSet samples =
      build_training_samples(sequences, item_vectors, catalog, cfg.eval.neg_ratio,
                             cfg.rank.max_history, cfg.eval.split_fraction, sample_rng);
  report.timings_ms["sample"] = clock.stop();
  report.counts["train_instances"] = samples.train.size();
  report.counts["test_instances"] = samples.test.size();
  report.counts["sampling_users_skipped"] = samples.users_skipped;
  report.counts["negatives_skipped"] = samples.negatives_skipped;
  if (samples.train.empty() || samples.test.empty()) {
    throw std::invalid_argument("pipeline: empty train or test split (stage sampling)");
  }

  // ranker
  clock.start();
  RankerConfig rcfg = cfg.rank;
  rcfg.seed = cfg.seed;
  const auto train_views = samples.train_views();
  const RankTrainResult trained = train_ranker(train_views, cfg.embed.dim, rcfg);
  report.timings_ms["rank"] = clock.stop();

  // evaluation
  clock.start();
  Rng eval_rng(0);
  ScoredSet pooled;
  std::map<std::uint32_t, ScoredSet> per_user;
  for (const InstanceRef& ref : samples.test) {
    const TrainingInstance inst = samples.view(ref);
    const double p = forward(inst, trained.params, rcfg, false, eval_rng);
    pooled.scores.push_back(p);
    pooled.labels.push_back(ref.label);
    per_user[ref.user].scores.push_back(p);
    per_user[ref.user].labels.push_back(ref.label);
  }
  std::vector<UserEval> user_evals;
  user_evals.reserve(per_user.size());
  for (auto& [user, scored] : per_user) {
    user_evals.push_back({samples.users[user], std::move(scored)});
  }
  report.metrics.auc = auc(pooled);
  const GaucResult g = gauc(user_evals);
  report.metrics.gauc = g.value;
  report.metrics.users_included = g.users_included;
  report.metrics.users_excluded = g.users_excluded;
  report.timings_ms["eval"] = clock.stop();
  report.counts["final_rank_loss"] = trained.epoch_loss.back();

  return report;
}

std::vector<Event> load_events_file(const std::string& path) {
  if (path.empty()) throw ConfigError("io.events is required for this run");
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open events file '" + path + "'");
  return parse_events(in, ParsePolicy::Abort).events;
}

std::vector<MetadataRow> load_metadata_file(const std::string& path) {
  if (path.empty()) return {};
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open metadata file '" + path + "'");
  return parse_metadata(in, ParsePolicy::Abort).rows;
}

}  // namespace

RunReport run_static(const PipelineConfig& cfg, const std::vector<Event>& events,
                     const std::vector<MetadataRow>& metadata) {
  if (cfg.mode != GraphMode::Static) throw ConfigError("run_static: graph.mode must be 'static'");
  return run_pipeline(cfg, events, metadata);
}

RunReport run_dynamic(const PipelineConfig& cfg, const std::vector<Event>& events,
                      const std::vector<MetadataRow>& metadata) {
  if (cfg.mode != GraphMode::Dynamic) throw ConfigError("run_dynamic: graph.mode must be 'dynamic'");
  return run_pipeline(cfg, events, metadata);
}

RunReport run_static(const PipelineConfig& cfg) {
  return run_static(cfg, load_events_file(cfg.io.events), load_metadata_file(cfg.io.metadata));
}

RunReport run_dynamic(const PipelineConfig& cfg) {
  return run_dynamic(cfg, load_events_file(cfg.io.events), load_metadata_file(cfg.io.metadata));
}

nlohmann::ordered_json SweepResult::to_json() const {
  nlohmann::ordered_json j;
  j["axis"] = axis == SweepAxis::Dropout ? "dropout" : "walk_length";
  j["rows"] = nlohmann::ordered_json::array();
  for (const SweepRow& row : rows) {
    nlohmann::ordered_json r;
    r["value"] = row.value;
    r["auc"] = row.auc;
    r["gauc"] = row.gauc;
    j["rows"].push_back(r);
  }
  j["gauc_nondecreasing_steps"] = gauc_nondecreasing_steps;
  return j;
}

std::string SweepResult::to_csv() const {
  std::ostringstream out;
  out << "value,auc,gauc\n";
  char buf[96];
  for (const SweepRow& row : rows) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g\n", row.value, row.auc, row.gauc);
    out << buf;
  }
  return out.str();
}

SweepResult sweep(const PipelineConfig& cfg, SweepAxis axis, const std::vector<double>& values,
                  const std::vector<Event>& events, const std::vector<MetadataRow>& metadata) {
  if (values.empty()) throw ConfigError("sweep: no values given");
  SweepResult result;
  result.axis = axis;
  for (double value : values) {
    PipelineConfig run_cfg = cfg;
    switch (axis) {
      case SweepAxis::Dropout:
        if (value < 0.0 || value >= 1.0) throw ConfigError("sweep: dropout value outside [0,1)");
        run_cfg.rank.dropout = value;
        break;
      case SweepAxis::WalkLength: {
        if (value < 2.0 || value != std::floor(value)) {
          throw ConfigError("sweep: walk_length value must be an integer >= 2");
        }
        run_cfg.walk.length = static_cast<std::size_t>(value);
        break;
      }
    }
    const RunReport report = run_pipeline(run_cfg, events, metadata);
    result.rows.push_back({value, report.metrics.auc, report.metrics.gauc});
  }
  for (std::size_t i = 1; i < result.rows.size(); ++i) {
    if (result.rows[i].gauc >= result.rows[i - 1].gauc) ++result.gauc_nondecreasing_steps;
  }
  return result;
}

nlohmann::ordered_json RepeatResult::to_json(bool include_timings) const {
  nlohmann::ordered_json j;
  j["runs"] = reports.size();
  j["mean"]["auc"] = auc_mean;
  j["mean"]["gauc"] = gauc_mean;
  j["std"]["auc"] = auc_std;
  j["std"]["gauc"] = gauc_std;
  j["reports"] = nlohmann::ordered_json::array();
  for (const RunReport& report : reports) {
    j["reports"].push_back(report.to_json(include_timings));
  }
  return j;
}

RepeatResult repeat_and_average(const PipelineConfig& cfg, std::size_t runs, bool vary_seeds,
                                const std::vector<Event>& events,
                                const std::vector<MetadataRow>& metadata) {
  if (runs < 1) throw ConfigError("repeat_and_average: runs must be >= 1");
  RepeatResult result;
  result.reports.reserve(runs);
  for (std::size_t i = 0; i < runs; ++i) {
    PipelineConfig run_cfg = cfg;
    if (vary_seeds) {
      std::uint64_t s = cfg.seed ^ (kRepeatTag + i);
      run_cfg.seed = splitmix64(s);
    }
    result.reports.push_back(run_pipeline(run_cfg, events, metadata));
  }
  const auto mean_std = [&](auto getter) {
    double mean = 0.0;
    for (const RunReport& r : result.reports) mean += getter(r);
    mean /= static_cast<double>(runs);
    double var = 0.0;
    if (runs > 1) {
      for (const RunReport& r : result.reports) {
        const double d = getter(r) - mean;
        var += d * d;
      }
      var /= static_cast<double>(runs - 1);
    }
    return std::pair<double, double>(mean, std::sqrt(var));
  };
  std::tie(result.auc_mean, result.auc_std) =
      mean_std([](const RunReport& r) { return r.metrics.auc; });
  std::tie(result.gauc_mean, result.gauc_std) =
      mean_std([](const RunReport& r) { return r.metrics.gauc; });
  return result;
}

}  // namespace dgem
