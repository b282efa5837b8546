#include "dgem/embedder.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace dgem {

double sigmoid(double x) {
  if (x >= 0.0) {
    return 1.0 / (1.0 + std::exp(-x));
  }
  const double e = std::exp(x);
  return e / (1.0 + e);
}

namespace {

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

void axpy(double a, std::span<const double> x, std::span<double> y) {
  for (std::size_t i = 0; i < x.size(); ++i) y[i] += a * x[i];
}

constexpr std::uint64_t kInitTag = 0x696e6974;
constexpr std::uint64_t kTrainTag = 0x74726169;

}  // namespace

PairGrad pair_loss_grad(VertexId center, VertexId context, std::span<const VertexId> negatives,
                        const EmbeddingMatrix& m) {
  for (VertexId t : negatives) {
    if (t == center || t == context) {
      throw std::invalid_argument("pair_loss_grad: negative overlaps center/context");
    }
  }
  const std::size_t d = m.dim();
  const auto x = m.row_in(center);

  PairGrad grad;
  grad.center_grad.assign(d, 0.0);
  grad.output_grads.reserve(1 + negatives.size());

  const auto u_pos = m.row_out(context);
  const double s_pos = sigmoid(dot(u_pos, x));
  grad.loss = -std::log(std::max(s_pos, 1e-300));
  {
    Vec g(d, 0.0);
    axpy(s_pos - 1.0, x, g);
    grad.output_grads.emplace_back(context, std::move(g));
  }
  axpy(s_pos - 1.0, u_pos, grad.center_grad);

  for (VertexId t : negatives) {
    const auto u_neg = m.row_out(t);
    const double s_neg = sigmoid(dot(u_neg, x));
    grad.loss -= std::log(std::max(1.0 - s_neg, 1e-300));
    Vec g(d, 0.0);
    axpy(s_neg, x, g);
    grad.output_grads.emplace_back(t, std::move(g));
    axpy(s_neg, u_neg, grad.center_grad);
  }
  return grad;
}

UnigramTable::UnigramTable(std::span<const std::uint64_t> counts, double power) {
  probs_.assign(counts.size(), 0.0);
  double total = 0.0;
  for (std::size_t v = 0; v < counts.size(); ++v) {
    if (counts[v] > 0) {
      probs_[v] = std::pow(static_cast<double>(counts[v]), power);
      total += probs_[v];
    }
  }
  if (total > 0.0) {
    for (std::size_t v = 0; v < counts.size(); ++v) {
      if (probs_[v] > 0.0) {
        probs_[v] /= total;
        support_ids_.push_back(static_cast<VertexId>(v));
        support_probs_.push_back(probs_[v]);
      }
    }
    sampler_.emplace(support_probs_);
  }
}

UnigramTable UnigramTable::from_walks(const std::vector<Walk>& walks, std::size_t n_vertices,
                                      double power) {
  std::vector<std::uint64_t> counts(n_vertices, 0);
  for (const Walk& walk : walks) {
    for (VertexId v : walk.vertices) {
      if (v >= n_vertices) throw std::out_of_range("UnigramTable: walk vertex out of range");
      ++counts[v];
    }
  }
  return UnigramTable(counts, power);
}

VertexId UnigramTable::sample(Rng& rng) const {
  if (!sampler_) throw std::invalid_argument("UnigramTable: empty support");
  return support_ids_[sampler_->sample(rng)];
}

std::vector<VertexId> negative_sample(const UnigramTable& table, std::size_t k,
                                      std::span<const VertexId> exclude, Rng& rng) {
  std::size_t excluded_in_support = 0;
  for (VertexId v : exclude) {
    if (v < table.vocabulary() && table.in_support(v)) ++excluded_in_support;
  }
  if (table.support_size() <= excluded_in_support) {
    throw std::invalid_argument("negative_sample: no vertex left to sample");
  }
  const auto is_excluded = [&](VertexId v) {
    return std::find(exclude.begin(), exclude.end(), v) != exclude.end();
  };

  std::vector<VertexId> out;
  out.reserve(k);
  constexpr int kMaxRetries = 10000;
  for (std::size_t i = 0; i < k; ++i) {
    bool drawn = false;
    for (int attempt = 0; attempt < kMaxRetries; ++attempt) {
      const VertexId v = table.sample(rng);
      if (!is_excluded(v)) {
        out.push_back(v);
        drawn = true;
        break;
      }
    }
    if (!drawn) {
      // Exact conditional draw over the remaining support; same target
      // distribution as rejection, reachable only under extreme skew.
      double total = 0.0;
      for (std::size_t s = 0; s < table.support_ids_.size(); ++s) {
        if (!is_excluded(table.support_ids_[s])) total += table.support_probs_[s];
      }
      double target = rng.uniform() * total;
      VertexId picked = 0;
      for (std::size_t s = 0; s < table.support_ids_.size(); ++s) {
        const VertexId v = table.support_ids_[s];
        if (is_excluded(v)) continue;
        picked = v;
        target -= table.support_probs_[s];
        if (target < 0.0) break;
      }
      out.push_back(picked);
    }
  }
  return out;
}

namespace {

// [lo, hi] context positions for center i, clamped to the walk.
std::pair<std::size_t, std::size_t> window_bounds(std::size_t size, std::size_t i,
                                                  std::size_t window) {
  return {i > window ? i - window : 0, std::min(size - 1, i + window)};
}

}  // namespace

void for_each_window_pair(std::span<const VertexId> walk, std::size_t window,
                          const std::function<void(std::size_t, std::size_t)>& fn) {
  for (std::size_t i = 0; i < walk.size(); ++i) {
    const auto [lo, hi] = window_bounds(walk.size(), i, window);
    for (std::size_t j = lo; j <= hi; ++j) {
      if (j != i) fn(i, j);
    }
  }
}

namespace {

// One SGNS update; returns the pair loss. Inlined version of pair_loss_grad
// that applies the update directly.
double sgns_update(EmbeddingMatrix& m, VertexId center, VertexId context,
                   std::span<const VertexId> negatives, double lr) {
  const std::size_t d = m.dim();
  const auto x = m.row_in(center);
  Vec x_grad(d, 0.0);

  const auto u_pos = m.row_out(context);
  const double s_pos = sigmoid(dot(u_pos, x));
  double loss = -std::log(std::max(s_pos, 1e-300));
  axpy(s_pos - 1.0, u_pos, x_grad);
  axpy(-lr * (s_pos - 1.0), x, m.row_out(context));

  for (VertexId t : negatives) {
    const auto u_neg = m.row_out(t);
    const double s_neg = sigmoid(dot(u_neg, x));
    loss -= std::log(std::max(1.0 - s_neg, 1e-300));
    axpy(s_neg, u_neg, x_grad);
    axpy(-lr * s_neg, x, m.row_out(t));
  }
  axpy(-lr, x_grad, m.row_in(center));
  return loss;
}

// One CBOW update: the averaged context input vectors predict the center.
double cbow_update(EmbeddingMatrix& m, std::span<const VertexId> contexts, VertexId center,
                   std::span<const VertexId> negatives, double lr) {
  const std::size_t d = m.dim();
  Vec h(d, 0.0);
  for (VertexId c : contexts) axpy(1.0, m.row_in(c), h);
  const double inv = 1.0 / static_cast<double>(contexts.size());
  for (double& x : h) x *= inv;

  Vec h_grad(d, 0.0);
  const auto u_pos = m.row_out(center);
  const double s_pos = sigmoid(dot(u_pos, h));
  double loss = -std::log(std::max(s_pos, 1e-300));
  axpy(s_pos - 1.0, u_pos, h_grad);
  axpy(-lr * (s_pos - 1.0), h, m.row_out(center));

  for (VertexId t : negatives) {
    const auto u_neg = m.row_out(t);
    const double s_neg = sigmoid(dot(u_neg, h));
    loss -= std::log(std::max(1.0 - s_neg, 1e-300));
    axpy(s_neg, u_neg, h_grad);
    axpy(-lr * s_neg, h, m.row_out(t));
  }
  for (VertexId c : contexts) axpy(-lr * inv, h_grad, m.row_in(c));
  return loss;
}

}  // namespace

EmbedResult train_embeddings(const std::vector<Walk>& walks, std::size_t n_vertices,
                             const EmbedConfig& cfg) {
  if (walks.empty()) throw std::invalid_argument("train_embeddings: empty corpus");
  if (n_vertices == 0) throw std::invalid_argument("train_embeddings: empty vocabulary");
  if (cfg.dim == 0 || cfg.window == 0 || cfg.negatives == 0 || cfg.epochs == 0) {
    throw std::invalid_argument("train_embeddings: invalid config");
  }

  EmbedResult result{EmbeddingMatrix(n_vertices, cfg.dim), {}, 0};
  EmbeddingMatrix& m = result.matrix;

  // Uniform init in (-0.5/d, +0.5/d) for input rows; output rows stay zero so
  // the first sigmoid terms sit at 0.5.
  {
    Rng init = Rng::stream(cfg.seed, kInitTag, 0);
    const double scale = 1.0 / static_cast<double>(cfg.dim);
    for (std::size_t v = 0; v < n_vertices; ++v) {
      for (double& x : m.row_in(static_cast<VertexId>(v))) {
        x = (init.uniform() - 0.5) * scale;
      }
    }
  }

  const UnigramTable table = UnigramTable::from_walks(walks, n_vertices);

  // Updates per epoch: one per (center, context) pair for skip-gram, one per
  // center with a non-empty window for CBOW.
  std::uint64_t updates_per_epoch = 0;
  for (const Walk& walk : walks) {
    if (cfg.mode == EmbedMode::SkipGramNS) {
      for_each_window_pair(walk.vertices, cfg.window,
                           [&](std::size_t, std::size_t) { ++updates_per_epoch; });
    } else {
      updates_per_epoch += walk.vertices.size() > 1 ? walk.vertices.size() : 0;
    }
  }
  if (updates_per_epoch == 0) {
    throw std::invalid_argument("train_embeddings: corpus yields no training pairs");
  }
  const std::uint64_t total_updates = updates_per_epoch * cfg.epochs;
  const double lr_end = cfg.lr0 / 10000.0;
  const auto lr_at = [&](std::uint64_t step) {
    const double frac = static_cast<double>(step) / static_cast<double>(total_updates);
    return cfg.lr0 + (lr_end - cfg.lr0) * frac;
  };

  result.epoch_loss.resize(cfg.epochs, 0.0);
  result.total_updates = total_updates;

  const unsigned threads = std::max(1u, cfg.threads);

  const auto run_range = [&](std::size_t first, std::size_t last, Rng rng,
                             std::uint64_t step_base, double* loss_sum) {
    std::vector<VertexId> local_contexts;
    std::uint64_t step = step_base;
    for (std::size_t widx = first; widx < last; ++widx) {
      const auto& verts = walks[widx].vertices;
      if (cfg.mode == EmbedMode::SkipGramNS) {
        for_each_window_pair(verts, cfg.window, [&](std::size_t i, std::size_t j) {
          const VertexId center = verts[i];
          const VertexId context = verts[j];
          const VertexId exclude[] = {center, context};
          std::size_t excluded_in_support = table.in_support(center) ? 1u : 0u;
          if (context != center && table.in_support(context)) ++excluded_in_support;
          const double lr = lr_at(step++);
          if (table.support_size() > excluded_in_support) {
            const auto negs = negative_sample(table, cfg.negatives, exclude, rng);
            *loss_sum += sgns_update(m, center, context, negs, lr);
          } else {
            *loss_sum += sgns_update(m, center, context, {}, lr);
          }
        });
      } else {
        if (verts.size() < 2) continue;
        for (std::size_t i = 0; i < verts.size(); ++i) {
          local_contexts.clear();
          const auto [lo, hi] = window_bounds(verts.size(), i, cfg.window);
          for (std::size_t j = lo; j <= hi; ++j) {
            if (j != i) local_contexts.push_back(verts[j]);
          }
          const VertexId center = verts[i];
          const VertexId exclude[] = {center};
          const double lr = lr_at(step++);
          if (table.support_size() > (table.in_support(center) ? 1u : 0u)) {
            const auto negs = negative_sample(table, cfg.negatives, exclude, rng);
            *loss_sum += cbow_update(m, local_contexts, center, negs, lr);
          } else {
            *loss_sum += cbow_update(m, local_contexts, center, {}, lr);
          }
        }
      }
    }
  };

  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    double epoch_loss = 0.0;
    if (threads == 1) {
      run_range(0, walks.size(), Rng::stream(cfg.seed, kTrainTag, epoch),
                epoch * updates_per_epoch, &epoch_loss);
    } else {
      // Fast mode: walk shards update the shared matrices concurrently.
      // Races are tolerated; results are finite but not bit-reproducible.
      std::vector<std::thread> pool;
      std::vector<double> losses(threads, 0.0);
      const std::size_t chunk = (walks.size() + threads - 1) / threads;
      for (unsigned t = 0; t < threads; ++t) {
        const std::size_t first = std::min(walks.size(), static_cast<std::size_t>(t) * chunk);
        const std::size_t last = std::min(walks.size(), first + chunk);
        if (first >= last) break;
        pool.emplace_back([&, t, first, last] {
          run_range(first, last, Rng::stream(cfg.seed, kTrainTag, epoch * 1000 + t),
                    epoch * updates_per_epoch, &losses[t]);
        });
      }
      for (auto& th : pool) th.join();
      for (double l : losses) epoch_loss += l;
    }
    result.epoch_loss[epoch] = epoch_loss / static_cast<double>(updates_per_epoch);
  }
  return result;
}

Vec aggregate_cold_start(const ColdStartInput& input) {
  const std::size_t count = input.aux.size() + (input.base ? 1 : 0);
  if (count == 0) throw std::invalid_argument("aggregate_cold_start: no vectors");
  std::size_t d = input.base ? input.base->size() : input.aux.front().size();
  Vec sum(d, 0.0);
  if (input.base) {
    if (input.base->size() != d) throw std::invalid_argument("aggregate_cold_start: dimension mismatch");
    axpy(1.0, *input.base, sum);
  }
  for (const Vec& v : input.aux) {
    if (v.size() != d) throw std::invalid_argument("aggregate_cold_start: dimension mismatch");
    axpy(1.0, v, sum);
  }
  const double inv = 1.0 / static_cast<double>(count);
  for (double& x : sum) x *= inv;
  return sum;
}

std::map<std::string, Vec> aux_token_embeddings(const EmbeddingMatrix& m, const Interner& intern,
                                                const Catalog& catalog) {
  std::map<std::string, Vec> sums;
  std::map<std::string, std::size_t> counts;
  for (const auto& [item, tokens] : catalog.aux_info) {
    const auto v = intern.find(item);
    if (!v) continue;  // solitary or unseen: contributes nothing
    for (const std::string& token : tokens) {
      auto [it, inserted] = sums.try_emplace(token, Vec(m.dim(), 0.0));
      axpy(1.0, m.row_in(*v), it->second);
      ++counts[token];
    }
  }
  for (auto& [token, sum] : sums) {
    const double inv = 1.0 / static_cast<double>(counts[token]);
    for (double& x : sum) x *= inv;
  }
  return sums;
}

std::map<std::string, Vec> embed_catalog(const EmbeddingMatrix& m, const Interner& intern,
                                         const Catalog& catalog,
                                         const std::map<std::string, Vec>& aux_embeddings) {
  std::map<std::string, Vec> out;
  for (const std::string& item : catalog.items) {
    ColdStartInput input;
    const bool solitary = catalog.solitary.count(item) > 0;
    if (!solitary) {
      const auto v = intern.find(item);
      if (!v) {
        throw std::invalid_argument("embed_catalog: interacted item '" + item +
                                    "' has no embedding row");
      }
      const auto row = m.row_in(*v);
      input.base = Vec(row.begin(), row.end());
    }
    if (auto it = catalog.aux_info.find(item); it != catalog.aux_info.end()) {
      // Tokens carried by no interacted item have no embedding and are skipped.
      for (const std::string& token : it->second) {
        if (auto emb = aux_embeddings.find(token); emb != aux_embeddings.end()) {
          input.aux.push_back(emb->second);
        }
      }
    }
    if (solitary && input.aux.empty()) {
      throw std::invalid_argument("embed_catalog: solitary item '" + item +
                                  "' has no known aux token");
    }
    out.emplace(item, aggregate_cold_start(input));
  }
  return out;
}

void write_embeddings(const std::map<std::string, Vec>& vectors, std::ostream& out) {
  if (vectors.empty()) {
    out << "0 0\n";
    return;
  }
  const std::size_t d = vectors.begin()->second.size();
  out << vectors.size() << ' ' << d << '\n';
  char buf[64];
  for (const auto& [item, vec] : vectors) {
    if (vec.size() != d) throw std::invalid_argument("write_embeddings: ragged dimensions");
    out << item;
    for (double x : vec) {
      std::snprintf(buf, sizeof buf, " %.17g", x);
      out << buf;
    }
    out << '\n';
  }
}

std::map<std::string, Vec> read_embeddings(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw ParseError(1, "missing embedding header");
  std::istringstream header(line);
  std::size_t n = 0, d = 0;
  header >> n >> d;
  if (header.fail()) throw ParseError(1, "bad embedding header");
  std::map<std::string, Vec> out;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    std::istringstream row(line);
    std::string item;
    row >> item;
    Vec vec;
    vec.reserve(d);
    double x = 0.0;
    while (row >> x) vec.push_back(x);
    if (vec.size() != d) throw ParseError(line_no, "wrong vector dimension");
    if (!out.emplace(item, std::move(vec)).second) throw ParseError(line_no, "duplicate item");
  }
  if (out.size() != n) throw ParseError(1, "header row count does not match body");
  return out;
}

}  // namespace dgem
