#include "dgem/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace dgem {

double auc(const ScoredSet& s) {
  if (s.scores.size() != s.labels.size()) {
    throw std::invalid_argument("auc: scores and labels differ in length");
  }
  const std::size_t n = s.scores.size();
  std::size_t positives = 0;
  for (int y : s.labels) {
    if (y != 0 && y != 1) throw std::invalid_argument("auc: label not binary");
    positives += static_cast<std::size_t>(y);
  }
  const std::size_t negatives = n - positives;
  if (positives == 0 || negatives == 0) {
    throw UndefinedAucError("auc: needs at least one positive and one negative");
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return s.scores[a] < s.scores[b]; });

  // Average ranks over tie groups keep the rank-sum equal to pairwise counting.
  double positive_rank_sum = 0.0;
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && s.scores[order[j + 1]] == s.scores[order[i]]) ++j;
    const double rank = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
    for (std::size_t k = i; k <= j; ++k) {
      if (s.labels[order[k]] == 1) positive_rank_sum += rank;
    }
    i = j + 1;
  }

  const double p = static_cast<double>(positives);
  return (positive_rank_sum - p * (p + 1.0) / 2.0) /
         (p * static_cast<double>(negatives));
}

double gauc_weighted(std::span<const std::pair<double, std::size_t>> user_aucs) {
  if (user_aucs.empty()) throw UndefinedAucError("gauc: no users");
  double weighted = 0.0;
  double impressions = 0.0;
  for (const auto& [user_auc, n] : user_aucs) {
    weighted += static_cast<double>(n) * user_auc;
    impressions += static_cast<double>(n);
  }
  if (impressions == 0.0) throw UndefinedAucError("gauc: zero total impressions");
  return weighted / impressions;
}

GaucResult gauc(const std::vector<UserEval>& users) {
  GaucResult result;
  std::vector<std::pair<double, std::size_t>> pairs;
  pairs.reserve(users.size());
  for (const UserEval& user : users) {
    try {
      pairs.emplace_back(auc(user.scored), user.scored.scores.size());
    } catch (const UndefinedAucError&) {
      ++result.users_excluded;
      continue;
    }
    ++result.users_included;
  }
  if (result.users_included == 0) {
    throw UndefinedAucError("gauc: no user has a defined AUC");
  }
  result.value = gauc_weighted(pairs);
  return result;
}

double rela_impr(double measured_auc, double base_auc) {
  if (base_auc == 0.5) {
    throw std::invalid_argument("rela_impr: baseline AUC of 0.5 has no headroom");
  }
  return ((measured_auc - 0.5) / (base_auc - 0.5) - 1.0) * 100.0;
}

}  // namespace dgem
