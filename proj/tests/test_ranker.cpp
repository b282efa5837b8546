#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "doctest.h"

#include "dgem/ranker.hpp"

using namespace dgem;

namespace {

RankerConfig small_config(Pooling pooling = Pooling::Attention) {
  RankerConfig cfg;
  cfg.pooling = pooling;
  cfg.hidden = {6, 4};
  cfg.attention_hidden = 5;
  cfg.dropout = 0.0;
  cfg.max_history = 8;
  cfg.lr = 0.3;
  cfg.epochs = 5;
  cfg.batch = 4;
  cfg.seed = 11;
  return cfg;
}

struct OwnedInstance {
  std::vector<Vec> history;
  Vec candidate;
  int label = 0;

  TrainingInstance view() const {
    TrainingInstance inst;
    for (const Vec& h : history) inst.history.emplace_back(h);
    inst.candidate = candidate;
    inst.label = label;
    return inst;
  }
};

OwnedInstance random_instance(std::size_t d, std::size_t max_len, Rng& rng) {
  OwnedInstance inst;
  const std::size_t len = 1 + rng.uniform_int(max_len);
  for (std::size_t i = 0; i < len; ++i) {
    Vec h(d);
    for (double& x : h) x = rng.gaussian();
    inst.history.push_back(std::move(h));
  }
  inst.candidate.resize(d);
  for (double& x : inst.candidate) x = rng.gaussian();
  inst.label = static_cast<int>(rng.uniform_int(2));
  return inst;
}

}  // namespace

TEST_CASE("attention_weight: zero parameters give zero logit") {
  const std::size_t d = 4;
  Rng rng(1);
  RankerParams params = RankerParams::init(d, small_config(), rng);
  params.zero_attention();
  Vec u(d, 0.7), v(d, -0.3);
  CHECK(attention_weight(u, v, params) == 0.0);
}

TEST_CASE("attention_weight: third input block is u - v") {
  const std::size_t d = 3;
  Rng rng(2);
  RankerParams params = RankerParams::init(d, small_config(), rng);
  // weight only the difference block
  for (std::size_t r = 0; r < params.att_w1.rows; ++r) {
    for (std::size_t c = 0; c < 2 * d; ++c) params.att_w1.at(r, c) = 0.0;
  }
  std::fill(params.att_b1.a.begin(), params.att_b1.a.end(), 0.0);
  params.att_b2.a[0] = 0.0;
  const Vec u = {0.5, -1.0, 2.0};
  CHECK(attention_weight(u, u, params) == 0.0);
  const Vec v = {0.4, -1.0, 2.0};
  CHECK(attention_weight(u, v, params) != 0.0);
}

TEST_CASE("pool_history: zero attention parameters reproduce average pooling") {
  const std::size_t d = 6;
  Rng rng(3);
  RankerParams params = RankerParams::init(d, small_config(), rng);
  params.zero_attention();
  for (int trial = 0; trial < 100; ++trial) {
    const OwnedInstance inst = random_instance(d, 7, rng);
    const auto view = inst.view();
    const Vec att = pool_history(view.history, view.candidate, params, Pooling::Attention);
    const Vec avg = pool_history(view.history, view.candidate, params, Pooling::Average);
    for (std::size_t i = 0; i < d; ++i) CHECK(std::abs(att[i] - avg[i]) < 1e-12);
  }
}

TEST_CASE("pool_history: single item passes through; mean example") {
  const std::size_t d = 2;
  Rng rng(4);
  const RankerParams params = RankerParams::init(d, small_config(), rng);
  const Vec h = {0.9, -0.1};
  const Vec cand = {1.0, 1.0};
  const std::vector<std::span<const double>> single = {h};
  CHECK(pool_history(single, cand, params, Pooling::Attention) == h);
  CHECK(pool_history(single, cand, params, Pooling::Average) == h);

  const Vec h1 = {1.0, 0.0};
  const Vec h2 = {0.0, 1.0};
  const std::vector<std::span<const double>> pair = {h1, h2};
  CHECK(pool_history(pair, cand, params, Pooling::Average) == Vec{0.5, 0.5});
}

TEST_CASE("pool_history: permutation invariance in both modes") {
  const std::size_t d = 5;
  Rng rng(6);
  const RankerParams params = RankerParams::init(d, small_config(), rng);
  for (int trial = 0; trial < 50; ++trial) {
    OwnedInstance inst = random_instance(d, 6, rng);
    const auto view = inst.view();
    for (const Pooling mode : {Pooling::Average, Pooling::Attention}) {
      const Vec before = pool_history(view.history, view.candidate, params, mode);
      OwnedInstance shuffled = inst;
      rng.shuffle(shuffled.history);
      const auto sview = shuffled.view();
      const Vec after = pool_history(sview.history, sview.candidate, params, mode);
      for (std::size_t i = 0; i < d; ++i) {
        CHECK(after[i] == doctest::Approx(before[i]).epsilon(1e-12));
      }
    }
  }
}

TEST_CASE("pool_history: empty history throws") {
  Rng rng(7);
  const RankerParams params = RankerParams::init(3, small_config(), rng);
  const Vec cand = {1, 2, 3};
  CHECK_THROWS_AS(pool_history({}, cand, params, Pooling::Average), std::invalid_argument);
}

TEST_CASE("forward: zero parameters output exactly 0.5") {
  const std::size_t d = 4;
  Rng rng(8);
  RankerParams params = RankerParams::init(d, small_config(), rng);
  params.zero();
  const OwnedInstance inst = random_instance(d, 5, rng);
  Rng fwd_rng(0);
  CHECK(forward(inst.view(), params, small_config(), false, fwd_rng) == 0.5);
}

TEST_CASE("forward: evaluation mode is deterministic and strictly inside (0,1)") {
  const std::size_t d = 4;
  Rng rng(9);
  const RankerParams params = RankerParams::init(d, small_config(), rng);
  const RankerConfig cfg = small_config();
  for (int trial = 0; trial < 50; ++trial) {
    const OwnedInstance inst = random_instance(d, 6, rng);
    Rng r1(1), r2(2);
    const double p1 = forward(inst.view(), params, cfg, false, r1);
    const double p2 = forward(inst.view(), params, cfg, false, r2);
    CHECK(p1 == p2);
    CHECK(p1 > 0.0);
    CHECK(p1 < 1.0);
  }
}

TEST_CASE("nll_loss: hand values") {
  SUBCASE("all p = 0.5 costs ln 2") {
    const std::vector<double> preds = {0.5, 0.5, 0.5};
    const std::vector<int> labels = {1, 0, 1};
    CHECK(nll_loss(preds, labels) == doctest::Approx(std::log(2.0)).epsilon(1e-14));
  }
  SUBCASE("single y=1, p=0.25 costs -ln 0.25") {
    const std::vector<double> preds = {0.25};
    const std::vector<int> labels = {1};
    CHECK(nll_loss(preds, labels) == doctest::Approx(-std::log(0.25)).epsilon(1e-14));
  }
  SUBCASE("perfect predictions cost at most the clamp") {
    const std::vector<double> preds = {1.0, 0.0};
    const std::vector<int> labels = {1, 0};
    CHECK(nll_loss(preds, labels) <= 2e-12);
  }
  SUBCASE("errors") {
    CHECK_THROWS_AS(nll_loss(std::vector<double>{0.5}, std::vector<int>{1, 0}),
                    std::invalid_argument);
    CHECK_THROWS_AS(nll_loss(std::vector<double>{}, std::vector<int>{}), std::invalid_argument);
    CHECK_THROWS_AS(nll_loss(std::vector<double>{0.5}, std::vector<int>{2}),
                    std::invalid_argument);
  }
}

TEST_CASE("loss_and_grad matches finite differences across the whole network") {
  const std::size_t d = 4;
  Rng rng(321);
  for (const Pooling pooling : {Pooling::Attention, Pooling::Average}) {
    RankerConfig cfg = small_config(pooling);
    RankerParams params = RankerParams::init(d, cfg, rng);
    // random bias values too, so every gradient path is exercised
    for (double& x : params.att_b1.a) x = 0.1 * rng.gaussian();
    for (Tensor& b : params.mlp_b) {
      for (double& x : b.a) x = 0.1 * rng.gaussian();
    }

    std::vector<OwnedInstance> owned;
    for (int i = 0; i < 3; ++i) owned.push_back(random_instance(d, 4, rng));
    std::vector<TrainingInstance> batch;
    for (const auto& o : owned) batch.push_back(o.view());

    RankerParams grad = params;
    Rng grad_rng(0);
    loss_and_grad(batch, params, cfg, grad, false, grad_rng);

    const double eps = 1e-5;
    auto tensors = params.tensors();
    auto grads = grad.tensors();
    for (std::size_t t = 0; t < tensors.size(); ++t) {
      for (std::size_t i = 0; i < tensors[t]->a.size(); ++i) {
        const double saved = tensors[t]->a[i];
        tensors[t]->a[i] = saved + eps;
        const double up = batch_loss(batch, params, cfg);
        tensors[t]->a[i] = saved - eps;
        const double down = batch_loss(batch, params, cfg);
        tensors[t]->a[i] = saved;
        const double fd = (up - down) / (2.0 * eps);
        const double analytic = grads[t]->a[i];
        // absolute floor guards entries whose exact gradient is ~0, where
        // central differences only resolve rounding noise
        if (std::abs(analytic - fd) <= 1e-9) continue;
        const double rel = std::abs(analytic - fd) / std::max(std::abs(analytic), std::abs(fd));
        CHECK(rel < 1e-5);
      }
    }
  }
}

TEST_CASE("build_training_samples: two-item sequence with one negative") {
  const std::vector<UserSequence> sequences = {{"u", {{"A", 1}, {"B", 2}}}};
  std::map<std::string, Vec> vectors = {
      {"A", {1.0, 0.0}}, {"B", {0.0, 1.0}}, {"C", {1.0, 1.0}}};
  Catalog catalog;
  catalog.items = {"A", "B", "C"};
  Rng rng(5);
  const SampleSet set = build_training_samples(sequences, vectors, catalog, 1, 10, 0.2, rng);
  // one position, floor(0.2*1) = 0 test instances
  REQUIRE(set.train.size() == 2);
  CHECK(set.test.empty());
  CHECK(set.train[0].label == 1);
  CHECK(set.train[1].label == 0);
  // the only possible negative is C
  CHECK(set.vectors[set.train[1].candidate] == Vec{1.0, 1.0});
  // positive: history [A], candidate B
  REQUIRE(set.train[0].history.size() == 1);
  CHECK(set.vectors[set.train[0].history[0]] == Vec{1.0, 0.0});
  CHECK(set.vectors[set.train[0].candidate] == Vec{0.0, 1.0});
}

TEST_CASE("build_training_samples: neg_ratio 0 yields only positives") {
  const std::vector<UserSequence> sequences = {{"u", {{"A", 1}, {"B", 2}, {"A", 3}}}};
  std::map<std::string, Vec> vectors = {{"A", {1.0}}, {"B", {2.0}}};
  Catalog catalog;
  catalog.items = {"A", "B"};
  Rng rng(5);
  const SampleSet set = build_training_samples(sequences, vectors, catalog, 0, 10, 0.2, rng);
  for (const auto& ref : set.train) CHECK(ref.label == 1);
  for (const auto& ref : set.test) CHECK(ref.label == 1);
}

TEST_CASE("build_training_samples: deterministic under a fixed seed; split is chronological") {
  std::vector<UserSequence> sequences;
  std::map<std::string, Vec> vectors;
  Catalog catalog;
  for (int i = 0; i < 30; ++i) {
    const std::string item = "i" + std::to_string(i);
    vectors[item] = {static_cast<double>(i)};
    catalog.items.insert(item);
  }
  Rng gen(77);
  for (int u = 0; u < 5; ++u) {
    UserSequence seq;
    seq.user_id = "u" + std::to_string(u);
    for (int i = 0; i < 11; ++i) {
      seq.items.emplace_back("i" + std::to_string(gen.uniform_int(30)), i);
    }
    sequences.push_back(std::move(seq));
  }
  Rng r1(9), r2(9);
  const SampleSet s1 = build_training_samples(sequences, vectors, catalog, 2, 5, 0.2, r1);
  const SampleSet s2 = build_training_samples(sequences, vectors, catalog, 2, 5, 0.2, r2);
  REQUIRE(s1.train.size() == s2.train.size());
  REQUIRE(s1.test.size() == s2.test.size());
  for (std::size_t i = 0; i < s1.train.size(); ++i) {
    CHECK(s1.train[i].candidate == s2.train[i].candidate);
    CHECK(s1.train[i].history == s2.train[i].history);
  }
  // 10 positions per user, 2 test positions each, 3 instances per position
  CHECK(s1.test.size() == 5 * 2 * 3);
  CHECK(s1.train.size() == 5 * 8 * 3);
  // history is bounded
  for (const auto& ref : s1.train) CHECK(ref.history.size() <= 5);
}

TEST_CASE("build_training_samples: single-item users contribute nothing") {
  const std::vector<UserSequence> sequences = {{"u", {{"A", 1}}}};
  std::map<std::string, Vec> vectors = {{"A", {1.0}}};
  Catalog catalog;
  catalog.items = {"A"};
  Rng rng(5);
  const SampleSet set = build_training_samples(sequences, vectors, catalog, 1, 10, 0.2, rng);
  CHECK(set.train.empty());
  CHECK(set.test.empty());
  CHECK(set.users_skipped == 1);
}

TEST_CASE("train_ranker: drives loss down on separable data") {
  const std::size_t d = 4;
  Rng rng(55);
  Vec direction(d);
  for (double& x : direction) x = rng.gaussian();
  std::vector<OwnedInstance> owned;
  for (int i = 0; i < 200; ++i) {
    OwnedInstance inst = random_instance(d, 3, rng);
    inst.label = static_cast<int>(rng.uniform_int(2));
    // candidate carries the label signal
    for (std::size_t k = 0; k < d; ++k) {
      inst.candidate[k] = (inst.label ? 1.0 : -1.0) * direction[k] + 0.05 * rng.gaussian();
    }
    owned.push_back(std::move(inst));
  }
  std::vector<TrainingInstance> instances;
  for (const auto& o : owned) instances.push_back(o.view());

  RankerConfig cfg = small_config();
  cfg.epochs = 25;
  cfg.lr = 0.5;
  const RankTrainResult result = train_ranker(instances, d, cfg);
  REQUIRE(result.epoch_loss.size() == cfg.epochs);
  CHECK(result.epoch_loss.back() < 0.2 * result.epoch_loss.front());
}

TEST_CASE("train_ranker: deterministic loss history; dropout mode trains too") {
  const std::size_t d = 3;
  Rng rng(66);
  std::vector<OwnedInstance> owned;
  for (int i = 0; i < 40; ++i) owned.push_back(random_instance(d, 4, rng));
  std::vector<TrainingInstance> instances;
  for (const auto& o : owned) instances.push_back(o.view());

  RankerConfig cfg = small_config();
  cfg.dropout = 0.5;
  cfg.epochs = 3;
  const RankTrainResult a = train_ranker(instances, d, cfg);
  const RankTrainResult b = train_ranker(instances, d, cfg);
  CHECK(a.epoch_loss == b.epoch_loss);
  for (double l : a.epoch_loss) CHECK(std::isfinite(l));
}

TEST_CASE("train_ranker: empty input throws") {
  CHECK_THROWS_AS(train_ranker({}, 4, small_config()), std::invalid_argument);
}

TEST_CASE("ranker checkpoint round-trips parameters and config") {
  const std::size_t d = 5;
  Rng rng(77);
  RankerConfig cfg = small_config(Pooling::Average);
  cfg.dropout = 0.25;
  const RankerParams params = RankerParams::init(d, cfg, rng);

  std::ostringstream out;
  save_ranker(params, cfg, out);
  std::istringstream in(out.str());
  const auto [loaded, loaded_cfg] = load_ranker(in);

  CHECK(loaded.dim == d);
  CHECK(loaded_cfg.pooling == cfg.pooling);
  CHECK(loaded_cfg.dropout == cfg.dropout);
  CHECK(loaded_cfg.hidden == cfg.hidden);
  auto orig = params.tensors();
  auto restored = loaded.tensors();
  REQUIRE(orig.size() == restored.size());
  for (std::size_t t = 0; t < orig.size(); ++t) {
    CHECK(orig[t]->a == restored[t]->a);
  }
}
