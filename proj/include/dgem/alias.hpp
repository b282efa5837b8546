#pragma once

#include <cstdint>
#include <limits>
#include <queue>
#include <span>
#include <stdexcept>
#include <vector>

#include "dgem/rng.hpp"

namespace dgem {

// Walker/Vose alias table for O(1) draws from a fixed discrete distribution.
class AliasTable {
 public:
  explicit AliasTable(std::span<const double> weights) {
    const std::size_t n = weights.size();
    if (n == 0) throw std::invalid_argument("AliasTable: empty weight vector");
    double total = 0.0;
    for (double w : weights) {
      if (w < 0.0) throw std::invalid_argument("AliasTable: negative weight");
      total += w;
    }
    if (total <= 0.0) throw std::invalid_argument("AliasTable: zero total weight");

    prob_.assign(n, 0.0);
    alias_.assign(n, std::numeric_limits<std::size_t>::max());
    std::queue<std::size_t> small;
    std::queue<std::size_t> large;
    for (std::size_t i = 0; i < n; ++i) {
      prob_[i] = weights[i] * static_cast<double>(n) / total;
      if (prob_[i] < 1.0) {
        small.push(i);
      } else {
        large.push(i);
      }
    }
    while (!small.empty() && !large.empty()) {
      const std::size_t s = small.front();
      const std::size_t l = large.front();
      small.pop();
      large.pop();
      alias_[s] = l;
      prob_[l] -= 1.0 - prob_[s];
      if (prob_[l] < 1.0) {
        small.push(l);
      } else {
        large.push(l);
      }
    }
    // Leftovers are 1.0 up to rounding.
    while (!large.empty()) {
      prob_[large.front()] = 1.0;
      large.pop();
    }
    while (!small.empty()) {
      prob_[small.front()] = 1.0;
      small.pop();
    }
  }

  std::size_t sample(Rng& rng) const {
    const std::size_t slot = static_cast<std::size_t>(rng.uniform_int(prob_.size()));
    if (rng.uniform() < prob_[slot] || alias_[slot] == std::numeric_limits<std::size_t>::max()) {
      return slot;
    }
    return alias_[slot];
  }

  std::size_t size() const { return prob_.size(); }

 private:
  std::vector<double> prob_;
  std::vector<std::size_t> alias_;
};

}  // namespace dgem
