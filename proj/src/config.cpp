#include "dgem/config.hpp"

#include <fstream>
#include <set>

namespace dgem {

namespace {

void reject_unknown(const nlohmann::json& j, const std::set<std::string>& known,
                    const std::string& where) {
  for (const auto& [key, value] : j.items()) {
    if (!known.count(key)) {
      throw ConfigError("unknown key '" + where + key + "'");
    }
  }
}

template <typename T>
void read(const nlohmann::json& j, const char* key, T& out) {
  if (auto it = j.find(key); it != j.end()) {
    try {
      out = it->get<T>();
    } catch (const nlohmann::json::exception&) {
      throw ConfigError(std::string("bad value for '") + key + "'");
    }
  }
}

}  // namespace

BiasMode bias_mode_from_string(const std::string& s) {
  if (s == "uniform") return BiasMode::Uniform;
  if (s == "exponential") return BiasMode::Exponential;
  if (s == "linear") return BiasMode::Linear;
  throw ConfigError("unknown bias mode '" + s + "'");
}

std::string to_string(BiasMode mode) {
  switch (mode) {
    case BiasMode::Uniform: return "uniform";
    case BiasMode::Exponential: return "exponential";
    case BiasMode::Linear: return "linear";
  }
  return "uniform";
}

PipelineConfig PipelineConfig::from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ConfigError("config root must be an object");
  reject_unknown(j, {"seed", "graph", "walk", "embed", "rank", "eval", "io"}, "");

  PipelineConfig cfg;
  read(j, "seed", cfg.seed);

  if (auto it = j.find("graph"); it != j.end()) {
    reject_unknown(*it, {"mode"}, "graph.");
    std::string mode = "static";
    read(*it, "mode", mode);
    if (mode == "static") {
      cfg.mode = GraphMode::Static;
    } else if (mode == "dynamic") {
      cfg.mode = GraphMode::Dynamic;
    } else {
      throw ConfigError("graph.mode must be 'static' or 'dynamic'");
    }
  }

  if (auto it = j.find("walk"); it != j.end()) {
    reject_unknown(*it, {"length", "per_vertex", "alpha", "count", "start_bias", "step_bias", "strict_time"},
                   "walk.");
    read(*it, "length", cfg.walk.length);
    read(*it, "per_vertex", cfg.walk.per_vertex);
    read(*it, "alpha", cfg.walk.alpha);
    read(*it, "count", cfg.walk.count);
    std::string bias;
    if (it->contains("start_bias")) {
      read(*it, "start_bias", bias);
      cfg.walk.start_bias = bias_mode_from_string(bias);
    }
    if (it->contains("step_bias")) {
      read(*it, "step_bias", bias);
      cfg.walk.step_bias = bias_mode_from_string(bias);
    }
    read(*it, "strict_time", cfg.walk.strict_time);
  }

  if (auto it = j.find("embed"); it != j.end()) {
    reject_unknown(*it, {"dim", "window", "negatives", "epochs", "lr0", "mode", "threads"}, "embed.");
    read(*it, "dim", cfg.embed.dim);
    read(*it, "window", cfg.embed.window);
    read(*it, "negatives", cfg.embed.negatives);
    read(*it, "epochs", cfg.embed.epochs);
    read(*it, "lr0", cfg.embed.lr0);
    if (it->contains("mode")) {
      std::string mode;
      read(*it, "mode", mode);
      if (mode == "sgns") {
        cfg.embed.mode = EmbedMode::SkipGramNS;
      } else if (mode == "cbow") {
        cfg.embed.mode = EmbedMode::CbowNS;
      } else {
        throw ConfigError("embed.mode must be 'sgns' or 'cbow'");
      }
    }
    read(*it, "threads", cfg.embed.threads);
  }

  if (auto it = j.find("rank"); it != j.end()) {
    reject_unknown(*it,
                   {"pooling", "hidden", "attention_hidden", "dropout", "history", "lr", "epochs", "batch"},
                   "rank.");
    if (it->contains("pooling")) {
      std::string pooling;
      read(*it, "pooling", pooling);
      if (pooling == "attention") {
        cfg.rank.pooling = Pooling::Attention;
      } else if (pooling == "average") {
        cfg.rank.pooling = Pooling::Average;
      } else {
        throw ConfigError("rank.pooling must be 'attention' or 'average'");
      }
    }
    read(*it, "hidden", cfg.rank.hidden);
    read(*it, "attention_hidden", cfg.rank.attention_hidden);
    read(*it, "dropout", cfg.rank.dropout);
    read(*it, "history", cfg.rank.max_history);
    read(*it, "lr", cfg.rank.lr);
    read(*it, "epochs", cfg.rank.epochs);
    read(*it, "batch", cfg.rank.batch);
  }

  if (auto it = j.find("eval"); it != j.end()) {
    reject_unknown(*it, {"neg_ratio", "split_fraction", "holdout_fraction", "min_activity"}, "eval.");
    read(*it, "neg_ratio", cfg.eval.neg_ratio);
    read(*it, "split_fraction", cfg.eval.split_fraction);
    read(*it, "holdout_fraction", cfg.eval.holdout_fraction);
    read(*it, "min_activity", cfg.eval.min_activity);
  }

  if (auto it = j.find("io"); it != j.end()) {
    reject_unknown(*it, {"events", "metadata"}, "io.");
    read(*it, "events", cfg.io.events);
    read(*it, "metadata", cfg.io.metadata);
  }

  cfg.validate();
  return cfg;
}

PipelineConfig PipelineConfig::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  nlohmann::json j = nlohmann::json::parse(in, nullptr, false);
  if (j.is_discarded()) throw ConfigError("config file '" + path + "' is not valid JSON");
  return from_json(j);
}

void PipelineConfig::validate() const {
  if (walk.length < 2) throw ConfigError("walk.length must be >= 2");
  if (walk.per_vertex < 1) throw ConfigError("walk.per_vertex must be >= 1");
  if (walk.alpha < 0.0 || walk.alpha > 1.0) throw ConfigError("walk.alpha must be in [0,1]");
  if (embed.dim < 1) throw ConfigError("embed.dim must be >= 1");
  if (embed.window < 1) throw ConfigError("embed.window must be >= 1");
  if (embed.negatives < 1) throw ConfigError("embed.negatives must be >= 1");
  if (embed.epochs < 1) throw ConfigError("embed.epochs must be >= 1");
  if (embed.lr0 <= 0.0) throw ConfigError("embed.lr0 must be > 0");
  if (embed.threads < 1) throw ConfigError("embed.threads must be >= 1");
  if (rank.hidden.empty()) throw ConfigError("rank.hidden must not be empty");
  for (std::size_t h : rank.hidden) {
    if (h < 1) throw ConfigError("rank.hidden sizes must be >= 1");
  }
  if (rank.attention_hidden < 1) throw ConfigError("rank.attention_hidden must be >= 1");
  if (rank.dropout < 0.0 || rank.dropout >= 1.0) throw ConfigError("rank.dropout must be in [0,1)");
  if (rank.max_history < 1) throw ConfigError("rank.history must be >= 1");
  if (rank.lr <= 0.0) throw ConfigError("rank.lr must be > 0");
  if (rank.epochs < 1) throw ConfigError("rank.epochs must be >= 1");
  if (rank.batch < 1) throw ConfigError("rank.batch must be >= 1");
  if (eval.split_fraction <= 0.0 || eval.split_fraction >= 1.0) {
    throw ConfigError("eval.split_fraction must be in (0,1)");
  }
  if (eval.holdout_fraction <= 0.0 || eval.holdout_fraction >= 1.0) {
    throw ConfigError("eval.holdout_fraction must be in (0,1)");
  }
}

nlohmann::ordered_json PipelineConfig::to_json() const {
  nlohmann::ordered_json j;
  j["seed"] = seed;
  j["graph"]["mode"] = mode == GraphMode::Static ? "static" : "dynamic";
  j["walk"]["length"] = walk.length;
  j["walk"]["per_vertex"] = walk.per_vertex;
  j["walk"]["alpha"] = walk.alpha;
  j["walk"]["count"] = walk.count;
  j["walk"]["start_bias"] = to_string(walk.start_bias);
  j["walk"]["step_bias"] = to_string(walk.step_bias);
  j["walk"]["strict_time"] = walk.strict_time;
  j["embed"]["dim"] = embed.dim;
  j["embed"]["window"] = embed.window;
  j["embed"]["negatives"] = embed.negatives;
  j["embed"]["epochs"] = embed.epochs;
  j["embed"]["lr0"] = embed.lr0;
  j["embed"]["mode"] = embed.mode == EmbedMode::SkipGramNS ? "sgns" : "cbow";
  j["embed"]["threads"] = embed.threads;
  j["rank"]["pooling"] = rank.pooling == Pooling::Attention ? "attention" : "average";
  j["rank"]["hidden"] = rank.hidden;
  j["rank"]["attention_hidden"] = rank.attention_hidden;
  j["rank"]["dropout"] = rank.dropout;
  j["rank"]["history"] = rank.max_history;
  j["rank"]["lr"] = rank.lr;
  j["rank"]["epochs"] = rank.epochs;
  j["rank"]["batch"] = rank.batch;
  j["eval"]["neg_ratio"] = eval.neg_ratio;
  j["eval"]["split_fraction"] = eval.split_fraction;
  j["eval"]["holdout_fraction"] = eval.holdout_fraction;
  j["eval"]["min_activity"] = eval.min_activity;
  j["io"]["events"] = io.events;
  j["io"]["metadata"] = io.metadata;
  return j;
}

}  // namespace dgem
