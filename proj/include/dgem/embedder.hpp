#pragma once

#include <cstdint>
#include <functional>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "dgem/alias.hpp"
#include "dgem/corpus.hpp"
#include "dgem/item_graph.hpp"
#include "dgem/rng.hpp"
#include "dgem/walker.hpp"

namespace dgem {

using Vec = std::vector<double>;

enum class EmbedMode { SkipGramNS, CbowNS };

struct EmbedConfig {
  std::size_t dim = 180;
  std::size_t window = 20;
  std::size_t negatives = 5;
  std::size_t epochs = 5;
  double lr0 = 0.025;
  EmbedMode mode = EmbedMode::SkipGramNS;
  std::uint64_t seed = 1;
  unsigned threads = 1;  // >1 = fast mode: racy lock-free updates, not bit-reproducible
};

// Input rows are the embedding proper; output rows are the context vectors
// used only during training.
class EmbeddingMatrix {
 public:
  EmbeddingMatrix(std::size_t n, std::size_t d) : n_(n), d_(d), input_(n * d, 0.0), output_(n * d, 0.0) {}

  std::size_t rows() const { return n_; }
  std::size_t dim() const { return d_; }
  std::span<double> row_in(VertexId v) { return {input_.data() + static_cast<std::size_t>(v) * d_, d_}; }
  std::span<const double> row_in(VertexId v) const { return {input_.data() + static_cast<std::size_t>(v) * d_, d_}; }
  std::span<double> row_out(VertexId v) { return {output_.data() + static_cast<std::size_t>(v) * d_, d_}; }
  std::span<const double> row_out(VertexId v) const { return {output_.data() + static_cast<std::size_t>(v) * d_, d_}; }

 private:
  std::size_t n_, d_;
  std::vector<double> input_, output_;
};

// Numerically stable logistic function.
double sigmoid(double x);

struct PairGrad {
  double loss = 0.0;
  Vec center_grad;                                      // d/d in[center]
  std::vector<std::pair<VertexId, Vec>> output_grads;   // d/d out[context], out[negatives]
};

// Loss and sparse gradients of one skip-gram/negative-sampling pair:
//   -log s(out[ctx].in[c]) - sum_t log s(-out[t].in[c])
// Touches only in[center], out[context] and out[negatives].
PairGrad pair_loss_grad(VertexId center, VertexId context, std::span<const VertexId> negatives,
                        const EmbeddingMatrix& m);

// Noise distribution over vertices: corpus frequency raised to 0.75.
class UnigramTable {
 public:
  UnigramTable(std::span<const std::uint64_t> counts, double power = 0.75);
  static UnigramTable from_walks(const std::vector<Walk>& walks, std::size_t n_vertices,
                                 double power = 0.75);

  VertexId sample(Rng& rng) const;
  const std::vector<double>& probabilities() const { return probs_; }
  std::size_t vocabulary() const { return probs_.size(); }
  std::size_t support_size() const { return support_ids_.size(); }
  bool in_support(VertexId v) const { return probs_[v] > 0.0; }

 private:
  std::vector<double> probs_;          // normalized, indexed by vertex
  std::vector<VertexId> support_ids_;  // vertices with positive probability
  std::vector<double> support_probs_;
  std::optional<AliasTable> sampler_;  // over support_ids_

  friend std::vector<VertexId> negative_sample(const UnigramTable&, std::size_t,
                                               std::span<const VertexId>, Rng&);
};

// k i.i.d. draws from the table, excluded vertices rejected and redrawn
// (bounded retries, then an exact conditional draw over the remaining
// support). Throws std::invalid_argument when support \ exclude is empty.
std::vector<VertexId> negative_sample(const UnigramTable& table, std::size_t k,
                                      std::span<const VertexId> exclude, Rng& rng);

// Window enumeration shared by training and tests: calls fn(i, j) for every
// center position i and context position j in [i-w, i+w], j != i, clamped to
// the walk bounds.
void for_each_window_pair(std::span<const VertexId> walk, std::size_t window,
                          const std::function<void(std::size_t, std::size_t)>& fn);

struct EmbedResult {
  EmbeddingMatrix matrix;
  std::vector<double> epoch_loss;  // mean loss per update, per epoch
  std::uint64_t total_updates = 0;
};

// Skip-gram (or CBOW) with negative sampling over the walk corpus. Learning
// rate decays linearly from lr0 to lr0/10000 over all updates. Deterministic
// when threads == 1.
EmbedResult train_embeddings(const std::vector<Walk>& walks, std::size_t n_vertices,
                             const EmbedConfig& cfg);

struct ColdStartInput {
  std::optional<Vec> base;  // absent only for solitary items
  std::vector<Vec> aux;
};

// Arithmetic mean of base (when present) and the auxiliary vectors.
Vec aggregate_cold_start(const ColdStartInput& input);

// Auxiliary-token embeddings: mean of the learned rows of all interacted
// items carrying the token.
std::map<std::string, Vec> aux_token_embeddings(const EmbeddingMatrix& m, const Interner& intern,
                                                const Catalog& catalog);

// Final per-item vectors: interacted items aggregate their own row with
// their aux-token vectors; solitary items aggregate aux-token vectors only.
// Throws when a solitary item has no known aux token.
std::map<std::string, Vec> embed_catalog(const EmbeddingMatrix& m, const Interner& intern,
                                         const Catalog& catalog,
                                         const std::map<std::string, Vec>& aux_embeddings);

// Text format: "<N> <d>" header, then one line per item:
// "item v1 ... vd" at 17 significant digits (lossless round-trip).
void write_embeddings(const std::map<std::string, Vec>& vectors, std::ostream& out);
std::map<std::string, Vec> read_embeddings(std::istream& in);

}  // namespace dgem
