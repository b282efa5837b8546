#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "dgem/config.hpp"
#include "dgem/corpus.hpp"
#include "dgem/metrics.hpp"

#include "json.hpp"

namespace dgem {

struct SynthResult {
  std::vector<Event> events;
  std::vector<MetadataRow> metadata;
};

// Clustered interaction generator: items are split into n_clusters equal
// groups, every user gets a home cluster and picks in-cluster items with
// probability 1 - noise. Timestamps are strictly increasing per user.
// Metadata tags each item with its cluster id.
SynthResult synth_dataset(std::size_t n_users, std::size_t n_items, std::size_t n_clusters,
                          std::size_t events_per_user, double noise, std::uint64_t seed);

// Stable-sorts by timestamp and holds out the latest ceil(fraction * n)
// events; ties at the cut resolve by input order. Returns (train, held_out).
std::pair<std::vector<Event>, std::vector<Event>> holdout_dynamic(
    const std::vector<Event>& events, double fraction);

struct RunReport {
  nlohmann::ordered_json config_echo;
  MetricsReport metrics;
  nlohmann::ordered_json graph_stats;
  nlohmann::ordered_json walk_stats;
  nlohmann::ordered_json counts;
  nlohmann::ordered_json timings_ms;

  // Deterministic under a fixed seed (timings excluded when false).
  nlohmann::ordered_json to_json(bool include_timings = true) const;
  nlohmann::ordered_json metrics_json() const;
};

// Full static pipeline: filter -> sequences/catalog -> static graph ->
// unequal-probability walks -> SGNS embeddings -> catalog aggregation ->
// sampling -> ranker -> AUC/GAUC on the per-user test split.
RunReport run_static(const PipelineConfig& cfg, const std::vector<Event>& events,
                     const std::vector<MetadataRow>& metadata);

// Dynamic pipeline: additionally holds out the latest events, builds the
// dynamic graph and temporal walks, and embeds solitary items from their
// auxiliary tokens.
RunReport run_dynamic(const PipelineConfig& cfg, const std::vector<Event>& events,
                      const std::vector<MetadataRow>& metadata);

// File-loading variants; paths come from cfg.io.
RunReport run_static(const PipelineConfig& cfg);
RunReport run_dynamic(const PipelineConfig& cfg);

enum class SweepAxis { Dropout, WalkLength };

struct SweepRow {
  double value = 0.0;
  double auc = 0.0;
  double gauc = 0.0;
};

struct SweepResult {
  SweepAxis axis = SweepAxis::Dropout;
  std::vector<SweepRow> rows;
  std::size_t gauc_nondecreasing_steps = 0;  // trend indicator, not asserted

  nlohmann::ordered_json to_json() const;
  std::string to_csv() const;
};

// One full run per value, all sharing the config seed.
SweepResult sweep(const PipelineConfig& cfg, SweepAxis axis, const std::vector<double>& values,
                  const std::vector<Event>& events, const std::vector<MetadataRow>& metadata);

struct RepeatResult {
  double auc_mean = 0.0, auc_std = 0.0;
  double gauc_mean = 0.0, gauc_std = 0.0;
  std::vector<RunReport> reports;

  nlohmann::ordered_json to_json(bool include_timings = true) const;
};

// runs repetitions; per-run seeds are derived from the master seed by run
// index unless vary_seeds is false, in which case every run reuses the
// master seed (and the spread is exactly zero).
RepeatResult repeat_and_average(const PipelineConfig& cfg, std::size_t runs, bool vary_seeds,
                                const std::vector<Event>& events,
                                const std::vector<MetadataRow>& metadata);

}  // namespace dgem
