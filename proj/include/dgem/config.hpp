#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "dgem/embedder.hpp"
#include "dgem/item_graph.hpp"
#include "dgem/ranker.hpp"
#include "dgem/walker.hpp"

#include "json.hpp"

namespace dgem {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct WalkSection {
  std::size_t length = 12;
  std::size_t per_vertex = 20;
  double alpha = 1.0;
  std::size_t count = 0;  // temporal walks; 0 = per_vertex * |V|
  BiasMode start_bias = BiasMode::Uniform;
  BiasMode step_bias = BiasMode::Uniform;
  bool strict_time = false;
};

struct EvalSection {
  std::size_t neg_ratio = 1;
  double split_fraction = 0.2;
  double holdout_fraction = 1.0 / 3.0;
  std::size_t min_activity = 5;
};

struct IoSection {
  std::string events;
  std::string metadata;
};

struct PipelineConfig {
  std::uint64_t seed = 1;
  GraphMode mode = GraphMode::Static;
  WalkSection walk;
  EmbedConfig embed;
  RankerConfig rank;
  EvalSection eval;
  IoSection io;

  // Parses and validates; unknown keys and out-of-range values raise
  // ConfigError. Missing keys take the defaults above.
  static PipelineConfig from_json(const nlohmann::json& j);
  static PipelineConfig from_file(const std::string& path);

  // Effective config with every default materialized; a run is replayable
  // from this echo.
  nlohmann::ordered_json to_json() const;

  void validate() const;  // throws ConfigError
};

BiasMode bias_mode_from_string(const std::string& s);
std::string to_string(BiasMode mode);

}  // namespace dgem
