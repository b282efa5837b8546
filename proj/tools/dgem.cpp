// dgem: item-graph embedding and ranking toolkit.
//
// Stage subcommands (ingest, build-graph, walk, embed, train, eval) pass
// artifacts through files so each stage is independently testable; run-static,
// run-dynamic and sweep drive the whole pipeline from a JSON config.

#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"

#include "dgem/config.hpp"
#include "dgem/corpus.hpp"
#include "dgem/embedder.hpp"
#include "dgem/harness.hpp"
#include "dgem/item_graph.hpp"
#include "dgem/metrics.hpp"
#include "dgem/ranker.hpp"
#include "dgem/walker.hpp"

namespace {

using dgem::ConfigError;

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open output file '" + path + "'");
  return out;
}

std::ifstream open_in(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open input file '" + path + "'");
  return in;
}

void emit(const nlohmann::ordered_json& j, const std::string& out_path) {
  if (out_path.empty()) {
    std::cout << j.dump(2) << '\n';
  } else {
    open_out(out_path) << j.dump(2) << '\n';
  }
}

void emit_text(const std::string& text, const std::string& out_path) {
  if (out_path.empty()) {
    std::cout << text;
  } else {
    open_out(out_path) << text;
  }
}

// Flattened "section.key,value" lines.
std::string report_csv(const nlohmann::ordered_json& j, const std::string& prefix = "") {
  std::string out;
  for (const auto& [key, value] : j.items()) {
    const std::string name = prefix.empty() ? key : prefix + "." + key;
    if (value.is_object()) {
      out += report_csv(value, name);
    } else {
      std::string cell = value.dump();
      if (cell.find(',') != std::string::npos) cell = "\"" + cell + "\"";
      out += name + "," + cell + "\n";
    }
  }
  return out;
}

dgem::RecordFormat format_from_string(const std::string& s) {
  if (s == "auto") return dgem::RecordFormat::Auto;
  if (s == "tsv") return dgem::RecordFormat::Tsv;
  if (s == "csv") return dgem::RecordFormat::Csv;
  if (s == "json") return dgem::RecordFormat::JsonLines;
  throw ConfigError("unknown record format '" + s + "'");
}

std::vector<dgem::Event> load_events(const std::string& path, const std::string& format,
                                     const std::string& policy) {
  auto in = open_in(path);
  const auto pol = policy == "abort" ? dgem::ParsePolicy::Abort : dgem::ParsePolicy::Skip;
  return dgem::parse_events(in, pol, format_from_string(format)).events;
}

std::vector<dgem::MetadataRow> load_metadata(const std::string& path) {
  if (path.empty()) return {};
  auto in = open_in(path);
  return dgem::parse_metadata(in, dgem::ParsePolicy::Abort).rows;
}

dgem::PipelineConfig load_config(const std::string& path, std::uint64_t seed, bool seed_set) {
  dgem::PipelineConfig cfg = dgem::PipelineConfig::from_file(path);
  if (seed_set) cfg.seed = seed;
  return cfg;
}

// Training-sample construction shared by the train and eval subcommands; the
// same parameters and seed reproduce the same split.
struct SamplingFlags {
  std::size_t neg_ratio = 1;
  std::size_t history = 20;
  double split = 0.2;
  std::uint64_t seed = 1;
};

dgem::SampleSet rebuild_samples(const std::string& events_path, const std::string& metadata_path,
                                const std::string& embeddings_path, const SamplingFlags& flags) {
  const auto events = load_events(events_path, "auto", "abort");
  const auto metadata = load_metadata(metadata_path);
  auto emb_in = open_in(embeddings_path);
  const auto vectors = dgem::read_embeddings(emb_in);
  const auto sequences = dgem::build_sequences(events);
  const auto catalog = dgem::build_catalog(events, metadata);
  dgem::Rng rng = dgem::Rng::stream(flags.seed, 0x73616d70, 0);
  return dgem::build_training_samples(sequences, vectors, catalog, flags.neg_ratio,
                                      flags.history, flags.split, rng);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"dual-modal item-graph embedding and ranking toolkit"};
  app.require_subcommand(1);

  // ---- synth ----
  auto* synth = app.add_subcommand("synth", "generate a clustered synthetic dataset");
  std::size_t sy_users = 1000, sy_items = 200, sy_clusters = 10, sy_events = 16;
  double sy_noise = 0.1;
  std::uint64_t sy_seed = 1;
  std::string sy_out_events, sy_out_metadata;
  synth->add_option("--users", sy_users, "number of users");
  synth->add_option("--items", sy_items, "number of items");
  synth->add_option("--clusters", sy_clusters, "number of item clusters");
  synth->add_option("--events-per-user", sy_events, "events per user");
  synth->add_option("--noise", sy_noise, "out-of-cluster pick probability");
  synth->add_option("--seed", sy_seed, "rng seed");
  synth->add_option("--out-events", sy_out_events, "events output file")->required();
  synth->add_option("--out-metadata", sy_out_metadata, "metadata output file");

  // ---- ingest ----
  auto* ingest = app.add_subcommand("ingest", "parse, filter and normalize raw events");
  std::string in_events, in_metadata, in_format = "auto", in_policy = "skip", in_out_events, in_out;
  std::size_t in_min_activity = 5;
  ingest->add_option("--events", in_events, "events file")->required();
  ingest->add_option("--metadata", in_metadata, "metadata file");
  ingest->add_option("--format", in_format, "auto|tsv|csv|json");
  ingest->add_option("--policy", in_policy, "skip|abort on malformed lines");
  ingest->add_option("--min-activity", in_min_activity, "min events per user/item");
  ingest->add_option("--out-events", in_out_events, "normalized TSV events output");
  ingest->add_option("--out", in_out, "stats report output (default stdout)");

  // ---- build-graph ----
  auto* build = app.add_subcommand("build-graph", "build the item graph from events");
  std::string bg_events, bg_mode = "static", bg_out;
  build->add_option("--events", bg_events, "events file")->required();
  build->add_option("--mode", bg_mode, "static|dynamic");
  build->add_option("--out", bg_out, "graph output file")->required();

  // ---- walk ----
  auto* walk = app.add_subcommand("walk", "generate a walk corpus from a graph file");
  std::string wk_graph, wk_out, wk_start_bias = "uniform", wk_step_bias = "uniform";
  std::size_t wk_length = 12, wk_per_vertex = 20, wk_count = 0;
  double wk_alpha = 1.0;
  std::uint64_t wk_seed = 1;
  bool wk_strict = false;
  walk->add_option("--graph", wk_graph, "graph file")->required();
  walk->add_option("--out", wk_out, "walk corpus output")->required();
  walk->add_option("--length", wk_length, "walk length (vertices)");
  walk->add_option("--per-vertex", wk_per_vertex, "walks per vertex (static)");
  walk->add_option("--alpha", wk_alpha, "stay hyperparameter (static)");
  walk->add_option("--count", wk_count, "walk count (temporal; 0 = per-vertex * |V|)");
  walk->add_option("--start-bias", wk_start_bias, "uniform|exponential|linear (temporal)");
  walk->add_option("--step-bias", wk_step_bias, "uniform|exponential|linear (temporal)");
  walk->add_flag("--strict-time", wk_strict, "require strictly increasing timestamps");
  walk->add_option("--seed", wk_seed, "rng seed");

  // ---- embed ----
  auto* embed = app.add_subcommand("embed", "train embeddings from a walk corpus");
  std::string em_walks, em_out, em_mode = "sgns";
  std::size_t em_dim = 180, em_window = 20, em_negatives = 5, em_epochs = 5;
  double em_lr0 = 0.025;
  std::uint64_t em_seed = 1;
  unsigned em_threads = 1;
  embed->add_option("--walks", em_walks, "walk corpus file")->required();
  embed->add_option("--out", em_out, "embedding output file")->required();
  embed->add_option("--dim", em_dim, "embedding dimension");
  embed->add_option("--window", em_window, "context window size");
  embed->add_option("--negatives", em_negatives, "negative samples per pair");
  embed->add_option("--epochs", em_epochs, "training epochs");
  embed->add_option("--lr0", em_lr0, "initial learning rate");
  embed->add_option("--mode", em_mode, "sgns|cbow");
  embed->add_option("--threads", em_threads, "threads (>1 is non-deterministic fast mode)");
  embed->add_option("--seed", em_seed, "rng seed");

  // ---- train ----
  auto* train = app.add_subcommand("train", "train the ranker on embedded sequences");
  std::string tr_events, tr_metadata, tr_embeddings, tr_out, tr_pooling = "attention";
  SamplingFlags tr_flags;
  std::vector<std::size_t> tr_hidden = {64, 32};
  std::size_t tr_att_hidden = 36, tr_epochs = 10, tr_batch = 32;
  double tr_dropout = 0.5, tr_lr = 0.1;
  train->add_option("--events", tr_events, "events file")->required();
  train->add_option("--metadata", tr_metadata, "metadata file");
  train->add_option("--embeddings", tr_embeddings, "embedding file")->required();
  train->add_option("--out", tr_out, "model checkpoint output")->required();
  train->add_option("--pooling", tr_pooling, "attention|average");
  train->add_option("--hidden", tr_hidden, "hidden layer sizes");
  train->add_option("--attention-hidden", tr_att_hidden, "attention hidden width");
  train->add_option("--dropout", tr_dropout, "dropout probability");
  train->add_option("--history", tr_flags.history, "max history length");
  train->add_option("--neg-ratio", tr_flags.neg_ratio, "negatives per positive");
  train->add_option("--split", tr_flags.split, "test fraction per user");
  train->add_option("--lr", tr_lr, "learning rate");
  train->add_option("--epochs", tr_epochs, "training epochs");
  train->add_option("--batch", tr_batch, "batch size");
  train->add_option("--seed", tr_flags.seed, "rng seed");

  // ---- eval ----
  auto* eval = app.add_subcommand("eval", "score the test split with a trained model");
  std::string ev_events, ev_metadata, ev_embeddings, ev_model, ev_out;
  SamplingFlags ev_flags;
  double ev_baseline_auc = 0.0, ev_baseline_gauc = 0.0;
  bool ev_has_baseline_auc = false, ev_has_baseline_gauc = false;
  eval->add_option("--events", ev_events, "events file")->required();
  eval->add_option("--metadata", ev_metadata, "metadata file");
  eval->add_option("--embeddings", ev_embeddings, "embedding file")->required();
  eval->add_option("--model", ev_model, "model checkpoint")->required();
  eval->add_option("--neg-ratio", ev_flags.neg_ratio, "negatives per positive");
  eval->add_option("--split", ev_flags.split, "test fraction per user");
  eval->add_option("--seed", ev_flags.seed, "rng seed (must match training)");
  eval->add_option("--baseline-auc", ev_baseline_auc, "baseline AUC for RelaImpr")
      ->each([&](const std::string&) { ev_has_baseline_auc = true; });
  eval->add_option("--baseline-gauc", ev_baseline_gauc, "baseline GAUC for RelaImpr")
      ->each([&](const std::string&) { ev_has_baseline_gauc = true; });
  eval->add_option("--out", ev_out, "metrics report output (default stdout)");

  // ---- run-static / run-dynamic / sweep ----
  std::string rs_config, rs_out, rs_format = "json";
  std::uint64_t rs_seed = 0;
  bool rs_seed_set = false;
  std::size_t rs_repeats = 1;
  bool rs_fixed_seed_repeats = false;

  const auto add_run_flags = [&](CLI::App* cmd) {
    cmd->add_option("--config", rs_config, "pipeline config (JSON)")->required();
    cmd->add_option("--seed", rs_seed, "override config seed")
        ->each([&](const std::string&) { rs_seed_set = true; });
    cmd->add_option("--out", rs_out, "report output (default stdout)");
    cmd->add_option("--format", rs_format, "json|csv");
    cmd->add_option("--repeats", rs_repeats, "repeat runs and aggregate mean/std");
    cmd->add_flag("--fixed-seed-repeats", rs_fixed_seed_repeats,
                  "reuse the master seed for every repeat");
  };
  auto* run_static_cmd = app.add_subcommand("run-static", "full static pipeline from a config");
  add_run_flags(run_static_cmd);
  auto* run_dynamic_cmd = app.add_subcommand("run-dynamic", "full dynamic pipeline from a config");
  add_run_flags(run_dynamic_cmd);

  auto* sweep_cmd = app.add_subcommand("sweep", "run the pipeline across one axis of values");
  std::string sw_axis = "dropout";
  std::vector<double> sw_values;
  sweep_cmd->add_option("--config", rs_config, "pipeline config (JSON)")->required();
  sweep_cmd->add_option("--axis", sw_axis, "dropout|walk_length")->required();
  sweep_cmd->add_option("--values", sw_values, "axis values")->required()->delimiter(',');
  sweep_cmd->add_option("--seed", rs_seed, "override config seed")
      ->each([&](const std::string&) { rs_seed_set = true; });
  sweep_cmd->add_option("--out", rs_out, "table output (default stdout)");
  sweep_cmd->add_option("--format", rs_format, "json|csv");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (*synth) {
      const auto data = dgem::synth_dataset(sy_users, sy_items, sy_clusters, sy_events,
                                            sy_noise, sy_seed);
      auto out = open_out(sy_out_events);
      dgem::write_events(data.events, out);
      if (!sy_out_metadata.empty()) {
        auto mout = open_out(sy_out_metadata);
        dgem::write_metadata(data.metadata, mout);
      }
      std::cerr << "wrote " << data.events.size() << " events, " << data.metadata.size()
                << " metadata rows\n";
    } else if (*ingest) {
      auto in = open_in(in_events);
      const auto policy = in_policy == "abort" ? dgem::ParsePolicy::Abort : dgem::ParsePolicy::Skip;
      const auto parsed = dgem::parse_events(in, policy, format_from_string(in_format));
      const auto filtered = dgem::filter_min_activity(parsed.events, in_min_activity);
      const auto sequences = dgem::build_sequences(filtered.events);
      const auto metadata = load_metadata(in_metadata);
      const auto catalog = dgem::build_catalog(filtered.events, metadata);
      if (!in_out_events.empty()) {
        auto out = open_out(in_out_events);
        dgem::write_events(filtered.events, out);
      }
      nlohmann::ordered_json stats;
      stats["events_parsed"] = parsed.events.size();
      stats["lines_skipped"] = parsed.issues.size();
      stats["events_after_filter"] = filtered.events.size();
      stats["users_dropped"] = filtered.dropped_users;
      stats["items_dropped"] = filtered.dropped_items;
      stats["users"] = sequences.size();
      stats["items"] = catalog.items.size();
      stats["solitary_items"] = catalog.solitary.size();
      stats["duplicate_metadata_dropped"] = catalog.duplicate_metadata_dropped;
      emit(stats, in_out);
    } else if (*build) {
      const auto events = load_events(bg_events, "auto", "abort");
      const auto sequences = dgem::build_sequences(events);
      dgem::ItemGraph graph;
      if (bg_mode == "static") {
        graph = dgem::build_static_graph(sequences);
      } else if (bg_mode == "dynamic") {
        graph = dgem::build_dynamic_graph(sequences);
      } else {
        throw ConfigError("--mode must be static or dynamic");
      }
      auto out = open_out(bg_out);
      dgem::write_graph(graph, out);
      std::cerr << "graph: " << graph.vertex_count() << " vertices, " << graph.edge_count()
                << " edges\n";
    } else if (*walk) {
      auto in = open_in(wk_graph);
      const dgem::ItemGraph graph = dgem::read_graph(in);
      dgem::WalkBatch batch;
      if (graph.mode == dgem::GraphMode::Static) {
        dgem::StaticWalkConfig cfg;
        cfg.walk_length = wk_length;
        cfg.walks_per_vertex = wk_per_vertex;
        cfg.alpha = wk_alpha;
        cfg.seed = wk_seed;
        batch = dgem::static_walks(graph, cfg);
      } else {
        const std::size_t count = wk_count > 0 ? wk_count : wk_per_vertex * graph.vertex_count();
        batch = dgem::temporal_walks(graph, count, wk_length,
                                     dgem::bias_mode_from_string(wk_start_bias),
                                     dgem::bias_mode_from_string(wk_step_bias), wk_seed, wk_strict);
      }
      auto out = open_out(wk_out);
      dgem::write_walks(batch.walks, graph.intern, out);
      std::cerr << "walks: " << batch.walks.size() << " emitted, " << batch.discarded_short
                << " discarded\n";
    } else if (*embed) {
      auto in = open_in(em_walks);
      const auto token_walks = dgem::read_walks(in);
      // Tokens are interned in sorted order so the vocabulary does not depend
      // on walk order.
      std::set<std::string> tokens;
      for (const auto& walk : token_walks) tokens.insert(walk.tokens.begin(), walk.tokens.end());
      dgem::Interner intern;
      for (const auto& token : tokens) intern.intern(token);
      std::vector<dgem::Walk> walks;
      walks.reserve(token_walks.size());
      for (const auto& tw : token_walks) {
        dgem::Walk walk;
        for (const auto& token : tw.tokens) walk.vertices.push_back(*intern.find(token));
        walks.push_back(std::move(walk));
      }
      dgem::EmbedConfig cfg;
      cfg.dim = em_dim;
      cfg.window = em_window;
      cfg.negatives = em_negatives;
      cfg.epochs = em_epochs;
      cfg.lr0 = em_lr0;
      cfg.mode = em_mode == "cbow" ? dgem::EmbedMode::CbowNS : dgem::EmbedMode::SkipGramNS;
      cfg.seed = em_seed;
      cfg.threads = em_threads;
      const auto result = dgem::train_embeddings(walks, intern.size(), cfg);
      std::map<std::string, dgem::Vec> vectors;
      for (std::size_t v = 0; v < intern.size(); ++v) {
        const auto row = result.matrix.row_in(static_cast<dgem::VertexId>(v));
        vectors.emplace(intern.token(static_cast<dgem::VertexId>(v)),
                        dgem::Vec(row.begin(), row.end()));
      }
      auto out = open_out(em_out);
      dgem::write_embeddings(vectors, out);
      std::cerr << "embedded " << vectors.size() << " items; final epoch loss "
                << result.epoch_loss.back() << '\n';
    } else if (*train) {
      const auto samples = rebuild_samples(tr_events, tr_metadata, tr_embeddings, tr_flags);
      if (samples.train.empty()) throw ConfigError("no training instances");
      dgem::RankerConfig cfg;
      cfg.pooling = tr_pooling == "average" ? dgem::Pooling::Average : dgem::Pooling::Attention;
      cfg.hidden = tr_hidden;
      cfg.attention_hidden = tr_att_hidden;
      cfg.dropout = tr_dropout;
      cfg.max_history = tr_flags.history;
      cfg.lr = tr_lr;
      cfg.epochs = tr_epochs;
      cfg.batch = tr_batch;
      cfg.seed = tr_flags.seed;
      const std::size_t d = samples.vectors.empty() ? 0 : samples.vectors.front().size();
      const auto trained = dgem::train_ranker(samples.train_views(), d, cfg);
      auto out = open_out(tr_out);
      dgem::save_ranker(trained.params, cfg, out);
      std::cerr << "epoch losses:";
      for (double l : trained.epoch_loss) std::cerr << ' ' << l;
      std::cerr << '\n';
    } else if (*eval) {
      auto model_in = open_in(ev_model);
      const auto [params, cfg] = dgem::load_ranker(model_in);
      SamplingFlags flags = ev_flags;
      flags.history = cfg.max_history;
      const auto samples = rebuild_samples(ev_events, ev_metadata, ev_embeddings, flags);
      if (samples.test.empty()) throw ConfigError("no test instances");
      dgem::Rng rng(0);
      dgem::ScoredSet pooled;
      std::map<std::uint32_t, dgem::ScoredSet> per_user;
      for (const auto& ref : samples.test) {
        const double p = dgem::forward(samples.view(ref), params, cfg, false, rng);
        pooled.scores.push_back(p);
        pooled.labels.push_back(ref.label);
        per_user[ref.user].scores.push_back(p);
        per_user[ref.user].labels.push_back(ref.label);
      }
      std::vector<dgem::UserEval> users;
      for (auto& [user, scored] : per_user) {
        users.push_back({samples.users[user], std::move(scored)});
      }
      const double overall = dgem::auc(pooled);
      const auto g = dgem::gauc(users);
      nlohmann::ordered_json report;
      report["auc"] = overall;
      report["gauc"] = g.value;
      report["n_users_included"] = g.users_included;
      report["n_users_excluded"] = g.users_excluded;
      if (ev_has_baseline_auc) report["rela_impr_auc"] = dgem::rela_impr(overall, ev_baseline_auc);
      if (ev_has_baseline_gauc) report["rela_impr_gauc"] = dgem::rela_impr(g.value, ev_baseline_gauc);
      emit(report, ev_out);
    } else if (*run_static_cmd || *run_dynamic_cmd) {
      if (rs_format != "json" && rs_format != "csv") {
        throw ConfigError("--format must be json or csv");
      }
      const auto cfg = load_config(rs_config, rs_seed, rs_seed_set);
      nlohmann::ordered_json j;
      if (rs_repeats > 1) {
        const auto events = load_events(cfg.io.events, "auto", "abort");
        const auto metadata = load_metadata(cfg.io.metadata);
        const auto result =
            dgem::repeat_and_average(cfg, rs_repeats, !rs_fixed_seed_repeats, events, metadata);
        j = result.to_json();
      } else {
        const dgem::RunReport report =
            *run_static_cmd ? dgem::run_static(cfg) : dgem::run_dynamic(cfg);
        j = report.to_json();
      }
      if (rs_format == "csv") {
        emit_text(report_csv(j), rs_out);
      } else {
        emit(j, rs_out);
      }
    } else if (*sweep_cmd) {
      if (rs_format != "json" && rs_format != "csv") {
        throw ConfigError("--format must be json or csv");
      }
      const auto cfg = load_config(rs_config, rs_seed, rs_seed_set);
      const auto axis = [&] {
        if (sw_axis == "dropout") return dgem::SweepAxis::Dropout;
        if (sw_axis == "walk_length") return dgem::SweepAxis::WalkLength;
        throw ConfigError("--axis must be dropout or walk_length");
      }();
      const auto events = load_events(cfg.io.events, "auto", "abort");
      const auto metadata = load_metadata(cfg.io.metadata);
      const auto result = dgem::sweep(cfg, axis, sw_values, events, metadata);
      if (rs_format == "csv") {
        emit_text(result.to_csv(), rs_out);
      } else {
        emit(result.to_json(), rs_out);
      }
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
