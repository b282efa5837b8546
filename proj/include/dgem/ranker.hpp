#pragma once

#include <cstdint>
#include <istream>
#include <map>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "dgem/corpus.hpp"
#include "dgem/embedder.hpp"
#include "dgem/rng.hpp"

namespace dgem {

enum class Pooling { Average, Attention };

struct RankerConfig {
  Pooling pooling = Pooling::Attention;
  std::vector<std::size_t> hidden = {64, 32};
  std::size_t attention_hidden = 36;
  double dropout = 0.5;
  std::size_t max_history = 20;
  double lr = 0.1;
  std::size_t epochs = 10;
  std::size_t batch = 32;
  std::uint64_t seed = 1;
};

struct Tensor {
  std::size_t rows = 0, cols = 0;
  std::vector<double> a;

  Tensor() = default;
  Tensor(std::size_t r, std::size_t c) : rows(r), cols(c), a(r * c, 0.0) {}
  double& at(std::size_t r, std::size_t c) { return a[r * cols + c]; }
  double at(std::size_t r, std::size_t c) const { return a[r * cols + c]; }
  std::span<double> row(std::size_t r) { return {a.data() + r * cols, cols}; }
  std::span<const double> row(std::size_t r) const { return {a.data() + r * cols, cols}; }
};

// Attention unit (3d -> a -> 1) plus scoring MLP (2d -> hidden... -> 1).
// Biases are stored as rows x 1 tensors.
struct RankerParams {
  std::size_t dim = 0;
  Tensor att_w1, att_b1, att_w2, att_b2;
  std::vector<Tensor> mlp_w, mlp_b;  // last layer has a single output row

  static RankerParams init(std::size_t d, const RankerConfig& cfg, Rng& rng);
  std::vector<Tensor*> tensors();
  std::vector<const Tensor*> tensors() const;
  std::vector<std::string> tensor_names() const;
  void zero_attention();
  void scale_add(const RankerParams& grad, double factor);  // this += factor * grad
  void zero();
};

// Non-owning view of one (history, candidate, label) sample.
struct TrainingInstance {
  std::vector<std::span<const double>> history;
  std::span<const double> candidate;
  int label = 0;
};

// Attention logit: FC2(relu(FC1(concat(u, v, u - v)))).
double attention_weight(std::span<const double> u, std::span<const double> v,
                        const RankerParams& params);

// Average: arithmetic mean of history. Attention: softmax-weighted sum with
// weights attention_weight(h_i, candidate); all-zero attention parameters
// therefore reproduce Average exactly.
Vec pool_history(std::span<const std::span<const double>> history,
                 std::span<const double> candidate, const RankerParams& params, Pooling mode);

// p = sigmoid(MLP(concat(pooled, candidate))). Dropout (inverted scaling) on
// MLP hidden activations only, and only in train mode.
double forward(const TrainingInstance& inst, const RankerParams& params,
               const RankerConfig& cfg, bool train_mode, Rng& rng);

// -(1/N) sum [y log p + (1-y) log(1-p)], p clamped to [1e-12, 1 - 1e-12].
double nll_loss(std::span<const double> preds, std::span<const int> labels);

// Mean loss over the batch; grad receives the mean parameter gradient.
double loss_and_grad(std::span<const TrainingInstance> batch, const RankerParams& params,
                     const RankerConfig& cfg, RankerParams& grad, bool train_mode, Rng& rng);

double batch_loss(std::span<const TrainingInstance> batch, const RankerParams& params,
                  const RankerConfig& cfg);

struct InstanceRef {
  std::vector<std::uint32_t> history;  // indices into SampleSet::vectors
  std::uint32_t candidate = 0;
  int label = 0;
  std::uint32_t user = 0;  // index into SampleSet::users
};

// Materialized positive/negative instances with a per-user chronological
// train/test split.
struct SampleSet {
  std::vector<Vec> vectors;
  std::vector<std::string> users;
  std::vector<InstanceRef> train, test;
  std::size_t users_skipped = 0;       // sequences with < 2 items
  std::size_t negatives_skipped = 0;   // positions where no negative item existed

  TrainingInstance view(const InstanceRef& ref) const;
  std::vector<TrainingInstance> train_views() const;
  std::vector<TrainingInstance> test_views() const;
};

// Per user, per position i >= 1: one positive (history = last <= max_history
// items before i, candidate = item i) plus neg_ratio negatives drawn
// uniformly from catalog items the user never touched. The last
// floor(split_fraction * positions) positions per user go to the test split.
SampleSet build_training_samples(const std::vector<UserSequence>& sequences,
                                 const std::map<std::string, Vec>& item_vectors,
                                 const Catalog& catalog, std::size_t neg_ratio,
                                 std::size_t max_history, double split_fraction, Rng& rng);

struct RankTrainResult {
  RankerParams params;
  std::vector<double> epoch_loss;
};

// Mini-batch SGD on the NLL loss; deterministic under a fixed seed.
RankTrainResult train_ranker(std::span<const TrainingInstance> instances, std::size_t d,
                             const RankerConfig& cfg);

// Checkpoint: "DGEM-RANKER v1" header, config echo, then all tensors with
// shapes at 17 significant digits.
void save_ranker(const RankerParams& params, const RankerConfig& cfg, std::ostream& out);
std::pair<RankerParams, RankerConfig> load_ranker(std::istream& in);

}  // namespace dgem
