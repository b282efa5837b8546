#pragma once

#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace dgem {

struct ScoredSet {
  std::vector<double> scores;
  std::vector<int> labels;  // parallel to scores, each 0 or 1
};

class UndefinedAucError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Rank-sum AUC with average ranks for tied scores, so the result equals
// P(score_pos > score_neg) + 0.5 P(tie). Throws UndefinedAucError unless
// both classes are present.
double auc(const ScoredSet& s);

struct UserEval {
  std::string user_id;
  ScoredSet scored;  // impressions == scored.scores.size()
};

struct GaucResult {
  double value = 0.0;
  std::size_t users_included = 0;
  std::size_t users_excluded = 0;  // single-class users, skipped from both sums
};

// Impression-weighted mean of (auc, impressions) pairs.
double gauc_weighted(std::span<const std::pair<double, std::size_t>> user_aucs);

// Impression-weighted mean of per-user AUC over users whose AUC is defined;
// impressions are the per-user scored counts.
GaucResult gauc(const std::vector<UserEval>& users);

// ((measured - 0.5) / (base - 0.5) - 1) * 100. Throws when base == 0.5.
double rela_impr(double measured_auc, double base_auc);

struct MetricsReport {
  double auc = 0.0;
  double gauc = 0.0;
  std::size_t users_included = 0;
  std::size_t users_excluded = 0;
  std::optional<double> rela_impr_vs_baseline;
};

}  // namespace dgem
