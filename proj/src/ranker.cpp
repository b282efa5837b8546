#include "dgem/ranker.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <set>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace dgem {

namespace {

constexpr double kProbEps = 1e-12;
constexpr std::uint64_t kInitTag = 0x726b696e;
constexpr std::uint64_t kEpochTag = 0x726b6570;

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

void matvec(const Tensor& w, std::span<const double> x, std::span<double> out) {
  for (std::size_t r = 0; r < w.rows; ++r) out[r] = dot(w.row(r), x);
}

std::vector<double> softmax(std::span<const double> z) {
  const double m = *std::max_element(z.begin(), z.end());
  std::vector<double> s(z.size());
  double total = 0.0;
  for (std::size_t i = 0; i < z.size(); ++i) {
    s[i] = std::exp(z[i] - m);
    total += s[i];
  }
  for (double& x : s) x /= total;
  return s;
}

void xavier_fill(Tensor& t, Rng& rng) {
  const double limit = std::sqrt(6.0 / static_cast<double>(t.rows + t.cols));
  for (double& x : t.a) x = (rng.uniform() * 2.0 - 1.0) * limit;
}

}  // namespace

RankerParams RankerParams::init(std::size_t d, const RankerConfig& cfg, Rng& rng) {
  if (d == 0) throw std::invalid_argument("RankerParams: zero embedding dimension");
  if (cfg.hidden.empty()) throw std::invalid_argument("RankerParams: no hidden layers");
  RankerParams p;
  p.dim = d;
  p.att_w1 = Tensor(cfg.attention_hidden, 3 * d);
  p.att_b1 = Tensor(cfg.attention_hidden, 1);
  p.att_w2 = Tensor(1, cfg.attention_hidden);
  p.att_b2 = Tensor(1, 1);
  std::size_t in = 2 * d;
  for (std::size_t h : cfg.hidden) {
    p.mlp_w.emplace_back(h, in);
    p.mlp_b.emplace_back(h, 1);
    in = h;
  }
  p.mlp_w.emplace_back(1, in);
  p.mlp_b.emplace_back(1, 1);
  xavier_fill(p.att_w1, rng);
  xavier_fill(p.att_w2, rng);
  for (Tensor& w : p.mlp_w) xavier_fill(w, rng);
  return p;
}

std::vector<Tensor*> RankerParams::tensors() {
  std::vector<Tensor*> out = {&att_w1, &att_b1, &att_w2, &att_b2};
  for (Tensor& t : mlp_w) out.push_back(&t);
  for (Tensor& t : mlp_b) out.push_back(&t);
  return out;
}

std::vector<const Tensor*> RankerParams::tensors() const {
  std::vector<const Tensor*> out = {&att_w1, &att_b1, &att_w2, &att_b2};
  for (const Tensor& t : mlp_w) out.push_back(&t);
  for (const Tensor& t : mlp_b) out.push_back(&t);
  return out;
}

std::vector<std::string> RankerParams::tensor_names() const {
  std::vector<std::string> names = {"att_w1", "att_b1", "att_w2", "att_b2"};
  for (std::size_t i = 0; i < mlp_w.size(); ++i) names.push_back("mlp_w" + std::to_string(i));
  for (std::size_t i = 0; i < mlp_b.size(); ++i) names.push_back("mlp_b" + std::to_string(i));
  return names;
}

void RankerParams::zero_attention() {
  for (Tensor* t : {&att_w1, &att_b1, &att_w2, &att_b2}) {
    std::fill(t->a.begin(), t->a.end(), 0.0);
  }
}

void RankerParams::zero() {
  for (Tensor* t : tensors()) std::fill(t->a.begin(), t->a.end(), 0.0);
}

void RankerParams::scale_add(const RankerParams& grad, double factor) {
  auto mine = tensors();
  auto theirs = grad.tensors();
  for (std::size_t i = 0; i < mine.size(); ++i) {
    for (std::size_t j = 0; j < mine[i]->a.size(); ++j) {
      mine[i]->a[j] += factor * theirs[i]->a[j];
    }
  }
}

namespace {

// concat(u, v, u - v)
std::vector<double> attention_input(std::span<const double> u, std::span<const double> v) {
  const std::size_t d = u.size();
  std::vector<double> t(3 * d);
  for (std::size_t i = 0; i < d; ++i) {
    t[i] = u[i];
    t[d + i] = v[i];
    t[2 * d + i] = u[i] - v[i];
  }
  return t;
}

struct AttentionCache {
  std::vector<std::vector<double>> inputs;   // t_i
  std::vector<std::vector<double>> hidden;   // relu(W1 t_i + b1)
  std::vector<double> logits;
  std::vector<double> weights;               // softmax(logits)
};

struct MlpCache {
  std::vector<double> x0;
  std::vector<std::vector<double>> pre;    // pre-activation per hidden layer
  std::vector<std::vector<double>> act;    // post relu+dropout per hidden layer
  std::vector<std::vector<double>> mask;   // dropout scale factors
  double logit = 0.0;
  double p = 0.5;
};

double attention_logit(std::span<const double> u, std::span<const double> v,
                       const RankerParams& params, std::vector<double>* input_out,
                       std::vector<double>* hidden_out) {
  auto t = attention_input(u, v);
  std::vector<double> h(params.att_w1.rows);
  matvec(params.att_w1, t, h);
  for (std::size_t r = 0; r < h.size(); ++r) {
    h[r] += params.att_b1.a[r];
    if (h[r] < 0.0) h[r] = 0.0;
  }
  const double logit = dot(params.att_w2.row(0), h) + params.att_b2.a[0];
  if (input_out) *input_out = std::move(t);
  if (hidden_out) *hidden_out = std::move(h);
  return logit;
}

Vec pool_with_cache(std::span<const std::span<const double>> history,
                    std::span<const double> candidate, const RankerParams& params,
                    Pooling mode, AttentionCache* cache) {
  if (history.empty()) throw std::invalid_argument("pool_history: empty history");
  const std::size_t d = candidate.size();
  for (const auto& h : history) {
    if (h.size() != d) throw std::invalid_argument("pool_history: dimension mismatch");
  }
  Vec pooled(d, 0.0);
  if (mode == Pooling::Average) {
    for (const auto& h : history) {
      for (std::size_t i = 0; i < d; ++i) pooled[i] += h[i];
    }
    const double inv = 1.0 / static_cast<double>(history.size());
    for (double& x : pooled) x *= inv;
    return pooled;
  }
  std::vector<double> logits(history.size());
  AttentionCache local;
  AttentionCache& c = cache ? *cache : local;
  c.inputs.resize(history.size());
  c.hidden.resize(history.size());
  for (std::size_t i = 0; i < history.size(); ++i) {
    logits[i] = attention_logit(history[i], candidate, params, &c.inputs[i], &c.hidden[i]);
  }
  c.logits = logits;
  c.weights = softmax(logits);
  for (std::size_t i = 0; i < history.size(); ++i) {
    for (std::size_t j = 0; j < d; ++j) pooled[j] += c.weights[i] * history[i][j];
  }
  return pooled;
}

double mlp_forward(std::span<const double> pooled, std::span<const double> candidate,
                   const RankerParams& params, const RankerConfig& cfg, bool train_mode,
                   Rng* rng, MlpCache* cache) {
  const std::size_t d = candidate.size();
  MlpCache local;
  MlpCache& c = cache ? *cache : local;
  c.x0.resize(2 * d);
  std::copy(pooled.begin(), pooled.end(), c.x0.begin());
  std::copy(candidate.begin(), candidate.end(), c.x0.begin() + d);

  const std::size_t n_hidden = params.mlp_w.size() - 1;
  c.pre.resize(n_hidden);
  c.act.resize(n_hidden);
  c.mask.resize(n_hidden);
  std::span<const double> x = c.x0;
  for (std::size_t l = 0; l < n_hidden; ++l) {
    const Tensor& w = params.mlp_w[l];
    c.pre[l].resize(w.rows);
    matvec(w, x, c.pre[l]);
    for (std::size_t r = 0; r < w.rows; ++r) c.pre[l][r] += params.mlp_b[l].a[r];
    c.act[l] = c.pre[l];
    for (double& a : c.act[l]) {
      if (a < 0.0) a = 0.0;
    }
    if (train_mode && cfg.dropout > 0.0) {
      // Inverted dropout: kept units scaled so evaluation needs no rescale.
      c.mask[l].resize(w.rows);
      const double keep = 1.0 - cfg.dropout;
      for (std::size_t r = 0; r < w.rows; ++r) {
        c.mask[l][r] = (rng->uniform() < keep) ? 1.0 / keep : 0.0;
        c.act[l][r] *= c.mask[l][r];
      }
    } else {
      c.mask[l].assign(w.rows, 1.0);
    }
    x = c.act[l];
  }
  c.logit = dot(params.mlp_w.back().row(0), x) + params.mlp_b.back().a[0];
  c.p = sigmoid(c.logit);
  return c.p;
}

double clamped_nll(double p, int label) {
  const double q = std::clamp(p, kProbEps, 1.0 - kProbEps);
  return label ? -std::log(q) : -std::log(1.0 - q);
}

}  // namespace

double attention_weight(std::span<const double> u, std::span<const double> v,
                        const RankerParams& params) {
  if (u.size() != params.dim || v.size() != params.dim) {
    throw std::invalid_argument("attention_weight: dimension mismatch");
  }
  return attention_logit(u, v, params, nullptr, nullptr);
}

Vec pool_history(std::span<const std::span<const double>> history,
                 std::span<const double> candidate, const RankerParams& params, Pooling mode) {
  return pool_with_cache(history, candidate, params, mode, nullptr);
}

double forward(const TrainingInstance& inst, const RankerParams& params,
               const RankerConfig& cfg, bool train_mode, Rng& rng) {
  const Vec pooled = pool_with_cache(inst.history, inst.candidate, params, cfg.pooling, nullptr);
  return mlp_forward(pooled, inst.candidate, params, cfg, train_mode, &rng, nullptr);
}

double nll_loss(std::span<const double> preds, std::span<const int> labels) {
  if (preds.size() != labels.size()) throw std::invalid_argument("nll_loss: length mismatch");
  if (preds.empty()) throw std::invalid_argument("nll_loss: empty input");
  double total = 0.0;
  for (std::size_t i = 0; i < preds.size(); ++i) {
    if (labels[i] != 0 && labels[i] != 1) throw std::invalid_argument("nll_loss: label not binary");
    total += clamped_nll(preds[i], labels[i]);
  }
  return total / static_cast<double>(preds.size());
}

double loss_and_grad(std::span<const TrainingInstance> batch, const RankerParams& params,
                     const RankerConfig& cfg, RankerParams& grad, bool train_mode, Rng& rng) {
  if (batch.empty()) throw std::invalid_argument("loss_and_grad: empty batch");
  grad.zero();
  const std::size_t d = params.dim;
  const std::size_t n_hidden = params.mlp_w.size() - 1;
  double total_loss = 0.0;

  for (const TrainingInstance& inst : batch) {
    AttentionCache att;
    MlpCache mlp;
    const Vec pooled =
        pool_with_cache(inst.history, inst.candidate, params, cfg.pooling, &att);
    const double p = mlp_forward(pooled, inst.candidate, params, cfg, train_mode, &rng, &mlp);
    total_loss += clamped_nll(p, inst.label);

    // d loss / d output logit for sigmoid + cross-entropy
    const double g_logit = p - static_cast<double>(inst.label);

    // output layer
    std::span<const double> last_act = n_hidden ? std::span<const double>(mlp.act.back()) : std::span<const double>(mlp.x0);
    for (std::size_t cidx = 0; cidx < last_act.size(); ++cidx) {
      grad.mlp_w.back().at(0, cidx) += g_logit * last_act[cidx];
    }
    grad.mlp_b.back().a[0] += g_logit;

    std::vector<double> g_act(last_act.size());
    for (std::size_t cidx = 0; cidx < last_act.size(); ++cidx) {
      g_act[cidx] = g_logit * params.mlp_w.back().at(0, cidx);
    }

    // hidden layers, backwards
    for (std::size_t l = n_hidden; l-- > 0;) {
      std::vector<double> g_pre(params.mlp_w[l].rows);
      for (std::size_t r = 0; r < g_pre.size(); ++r) {
        const double through = mlp.mask[l][r] * (mlp.pre[l][r] > 0.0 ? 1.0 : 0.0);
        g_pre[r] = g_act[r] * through;
      }
      std::span<const double> x = l == 0 ? std::span<const double>(mlp.x0) : std::span<const double>(mlp.act[l - 1]);
      Tensor& gw = grad.mlp_w[l];
      for (std::size_t r = 0; r < g_pre.size(); ++r) {
        if (g_pre[r] == 0.0) continue;
        for (std::size_t cidx = 0; cidx < x.size(); ++cidx) {
          gw.at(r, cidx) += g_pre[r] * x[cidx];
        }
        grad.mlp_b[l].a[r] += g_pre[r];
      }
      std::vector<double> g_x(x.size(), 0.0);
      for (std::size_t r = 0; r < g_pre.size(); ++r) {
        if (g_pre[r] == 0.0) continue;
        const auto wrow = params.mlp_w[l].row(r);
        for (std::size_t cidx = 0; cidx < x.size(); ++cidx) {
          g_x[cidx] += g_pre[r] * wrow[cidx];
        }
      }
      g_act = std::move(g_x);
    }

    if (cfg.pooling == Pooling::Attention) {
      // g_act now holds d loss / d x0; the first d entries are d loss / d pooled.
      std::span<const double> g_pooled(g_act.data(), d);
      const std::size_t L = inst.history.size();
      std::vector<double> g_s(L);
      double weighted = 0.0;
      for (std::size_t i = 0; i < L; ++i) {
        g_s[i] = dot(g_pooled, inst.history[i]);
        weighted += att.weights[i] * g_s[i];
      }
      for (std::size_t i = 0; i < L; ++i) {
        const double g_z = att.weights[i] * (g_s[i] - weighted);  // softmax Jacobian
        if (g_z == 0.0) continue;
        grad.att_b2.a[0] += g_z;
        const auto& h = att.hidden[i];
        for (std::size_t r = 0; r < h.size(); ++r) {
          grad.att_w2.at(0, r) += g_z * h[r];
        }
        for (std::size_t r = 0; r < h.size(); ++r) {
          if (h[r] <= 0.0) continue;  // relu gate
          const double g_h = g_z * params.att_w2.at(0, r);
          grad.att_b1.a[r] += g_h;
          auto grow = grad.att_w1.row(r);
          const auto& t = att.inputs[i];
          for (std::size_t cidx = 0; cidx < t.size(); ++cidx) {
            grow[cidx] += g_h * t[cidx];
          }
        }
      }
    }
  }

  const double inv = 1.0 / static_cast<double>(batch.size());
  for (Tensor* t : grad.tensors()) {
    for (double& x : t->a) x *= inv;
  }
  return total_loss * inv;
}

double batch_loss(std::span<const TrainingInstance> batch, const RankerParams& params,
                  const RankerConfig& cfg) {
  Rng unused(0);
  double total = 0.0;
  for (const TrainingInstance& inst : batch) {
    total += clamped_nll(forward(inst, params, cfg, false, unused), inst.label);
  }
  return total / static_cast<double>(batch.size());
}

TrainingInstance SampleSet::view(const InstanceRef& ref) const {
  TrainingInstance inst;
  inst.history.reserve(ref.history.size());
  for (std::uint32_t idx : ref.history) inst.history.emplace_back(vectors[idx]);
  inst.candidate = vectors[ref.candidate];
  inst.label = ref.label;
  return inst;
}

std::vector<TrainingInstance> SampleSet::train_views() const {
  std::vector<TrainingInstance> out;
  out.reserve(train.size());
  for (const InstanceRef& ref : train) out.push_back(view(ref));
  return out;
}

std::vector<TrainingInstance> SampleSet::test_views() const {
  std::vector<TrainingInstance> out;
  out.reserve(test.size());
  for (const InstanceRef& ref : test) out.push_back(view(ref));
  return out;
}

SampleSet build_training_samples(const std::vector<UserSequence>& sequences,
                                 const std::map<std::string, Vec>& item_vectors,
                                 const Catalog& catalog, std::size_t neg_ratio,
                                 std::size_t max_history, double split_fraction, Rng& rng) {
  if (max_history == 0) throw std::invalid_argument("build_training_samples: max_history == 0");
  if (split_fraction < 0.0 || split_fraction >= 1.0) {
    throw std::invalid_argument("build_training_samples: split_fraction outside [0,1)");
  }

  SampleSet set;
  std::vector<std::string> catalog_items(catalog.items.begin(), catalog.items.end());
  std::map<std::string, std::uint32_t> vector_index;
  const auto index_of = [&](const std::string& item) {
    auto [it, inserted] = vector_index.try_emplace(item, static_cast<std::uint32_t>(set.vectors.size()));
    if (inserted) {
      const auto vec = item_vectors.find(item);
      if (vec == item_vectors.end()) {
        throw std::invalid_argument("build_training_samples: no vector for item '" + item + "'");
      }
      set.vectors.push_back(vec->second);
    }
    return it->second;
  };

  for (const UserSequence& seq : sequences) {
    if (seq.items.size() < 2) {
      ++set.users_skipped;
      continue;
    }
    const std::uint32_t user = static_cast<std::uint32_t>(set.users.size());
    set.users.push_back(seq.user_id);
    std::set<std::string> seen;
    for (const auto& [item, t] : seq.items) seen.insert(item);

    const std::size_t positions = seq.items.size() - 1;
    const std::size_t n_test = static_cast<std::size_t>(
        std::floor(split_fraction * static_cast<double>(positions)));
    const std::size_t first_test = positions - n_test;

    for (std::size_t i = 1; i < seq.items.size(); ++i) {
      InstanceRef pos;
      const std::size_t hist_begin = i > max_history ? i - max_history : 0;
      for (std::size_t h = hist_begin; h < i; ++h) {
        pos.history.push_back(index_of(seq.items[h].first));
      }
      pos.candidate = index_of(seq.items[i].first);
      pos.label = 1;
      pos.user = user;
      auto& bucket = (i - 1) < first_test ? set.train : set.test;
      bucket.push_back(pos);

      for (std::size_t nidx = 0; nidx < neg_ratio; ++nidx) {
        // uniform over catalog items the user never interacted with
        std::string negative;
        bool found = false;
        if (seen.size() < catalog_items.size()) {
          for (int attempt = 0; attempt < 10000 && !found; ++attempt) {
            const auto& cand = catalog_items[rng.uniform_int(catalog_items.size())];
            if (!seen.count(cand)) {
              negative = cand;
              found = true;
            }
          }
          if (!found) {
            for (const auto& cand : catalog_items) {
              if (!seen.count(cand)) {
                negative = cand;
                found = true;
                break;
              }
            }
          }
        }
        if (!found) {
          ++set.negatives_skipped;
          continue;
        }
        InstanceRef neg = pos;
        neg.candidate = index_of(negative);
        neg.label = 0;
        bucket.push_back(std::move(neg));
      }
    }
  }
  return set;
}

RankTrainResult train_ranker(std::span<const TrainingInstance> instances, std::size_t d,
                             const RankerConfig& cfg) {
  if (instances.empty()) throw std::invalid_argument("train_ranker: no instances");
  if (cfg.batch == 0 || cfg.epochs == 0) throw std::invalid_argument("train_ranker: invalid config");
  if (cfg.dropout < 0.0 || cfg.dropout >= 1.0) {
    throw std::invalid_argument("train_ranker: dropout outside [0,1)");
  }

  Rng init_rng = Rng::stream(cfg.seed, kInitTag, 0);
  RankTrainResult result;
  result.params = RankerParams::init(d, cfg, init_rng);
  RankerParams grad = result.params;
  grad.zero();

  std::vector<std::size_t> order(instances.size());
  std::iota(order.begin(), order.end(), 0);
  std::vector<TrainingInstance> batch;
  batch.reserve(cfg.batch);

  result.epoch_loss.reserve(cfg.epochs);
  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    Rng rng = Rng::stream(cfg.seed, kEpochTag, epoch);
    rng.shuffle(order);
    double epoch_loss = 0.0;
    for (std::size_t start = 0; start < order.size(); start += cfg.batch) {
      const std::size_t end = std::min(order.size(), start + cfg.batch);
      batch.clear();
      for (std::size_t i = start; i < end; ++i) batch.push_back(instances[order[i]]);
      const double loss = loss_and_grad(batch, result.params, cfg, grad, true, rng);
      epoch_loss += loss * static_cast<double>(batch.size());
      result.params.scale_add(grad, -cfg.lr);
    }
    result.epoch_loss.push_back(epoch_loss / static_cast<double>(order.size()));
  }
  return result;
}

namespace {

nlohmann::ordered_json config_to_json(const RankerConfig& cfg, std::size_t dim) {
  nlohmann::ordered_json j;
  j["dim"] = dim;
  j["pooling"] = cfg.pooling == Pooling::Attention ? "attention" : "average";
  j["hidden"] = cfg.hidden;
  j["attention_hidden"] = cfg.attention_hidden;
  j["dropout"] = cfg.dropout;
  j["history"] = cfg.max_history;
  j["lr"] = cfg.lr;
  j["epochs"] = cfg.epochs;
  j["batch"] = cfg.batch;
  j["seed"] = cfg.seed;
  return j;
}

}  // namespace

void save_ranker(const RankerParams& params, const RankerConfig& cfg, std::ostream& out) {
  out << "DGEM-RANKER v1\n";
  out << "config " << config_to_json(cfg, params.dim).dump() << '\n';
  const auto names = params.tensor_names();
  const auto tensors = params.tensors();
  char buf[64];
  for (std::size_t i = 0; i < tensors.size(); ++i) {
    const Tensor& t = *tensors[i];
    out << "tensor " << names[i] << ' ' << t.rows << ' ' << t.cols << '\n';
    for (std::size_t r = 0; r < t.rows; ++r) {
      for (std::size_t c = 0; c < t.cols; ++c) {
        std::snprintf(buf, sizeof buf, c ? " %.17g" : "%.17g", t.at(r, c));
        out << buf;
      }
      out << '\n';
    }
  }
  out << "end\n";
}

std::pair<RankerParams, RankerConfig> load_ranker(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != "DGEM-RANKER v1") {
    throw ParseError(1, "bad ranker header");
  }
  if (!std::getline(in, line) || line.rfind("config ", 0) != 0) {
    throw ParseError(2, "missing config line");
  }
  const auto j = nlohmann::json::parse(line.substr(7), nullptr, false);
  if (j.is_discarded()) throw ParseError(2, "bad config json");

  RankerConfig cfg;
  cfg.pooling = j.at("pooling").get<std::string>() == "attention" ? Pooling::Attention
                                                                  : Pooling::Average;
  cfg.hidden = j.at("hidden").get<std::vector<std::size_t>>();
  cfg.attention_hidden = j.at("attention_hidden").get<std::size_t>();
  cfg.dropout = j.at("dropout").get<double>();
  cfg.max_history = j.at("history").get<std::size_t>();
  cfg.lr = j.at("lr").get<double>();
  cfg.epochs = j.at("epochs").get<std::size_t>();
  cfg.batch = j.at("batch").get<std::size_t>();
  cfg.seed = j.at("seed").get<std::uint64_t>();
  const std::size_t dim = j.at("dim").get<std::size_t>();

  Rng dummy(0);
  RankerParams params = RankerParams::init(dim, cfg, dummy);
  const auto names = params.tensor_names();
  const auto tensors = params.tensors();

  std::size_t line_no = 2;
  for (std::size_t i = 0; i < tensors.size(); ++i) {
    if (!std::getline(in, line)) throw ParseError(line_no, "truncated checkpoint");
    ++line_no;
    std::istringstream head(line);
    std::string kw, name;
    std::size_t rows = 0, cols = 0;
    head >> kw >> name >> rows >> cols;
    if (kw != "tensor" || name != names[i] || rows != tensors[i]->rows ||
        cols != tensors[i]->cols || head.fail()) {
      throw ParseError(line_no, "unexpected tensor header");
    }
    for (std::size_t r = 0; r < rows; ++r) {
      if (!std::getline(in, line)) throw ParseError(line_no, "truncated tensor");
      ++line_no;
      std::istringstream row(line);
      for (std::size_t c = 0; c < cols; ++c) {
        if (!(row >> tensors[i]->at(r, c))) throw ParseError(line_no, "bad tensor value");
      }
    }
  }
  if (!std::getline(in, line) || line != "end") throw ParseError(line_no + 1, "missing end marker");
  return {std::move(params), cfg};
}

}  // namespace dgem
