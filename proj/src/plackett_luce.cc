// Copyright 2026 The oltr Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "oltr/plackett_luce.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <unordered_set>

#include "oltr/errors.h"

namespace oltr {

void validate_pool(const ScoredPool& pool) {
  if (pool.item_ids.size() != pool.scores.size()) {
    throw ValidationError("pool has " + std::to_string(pool.item_ids.size()) +
                          " ids but " + std::to_string(pool.scores.size()) +
                          " scores");
  }
  std::unordered_set<ItemId> seen;
  for (std::size_t i = 0; i < pool.size(); ++i) {
    if (!seen.insert(pool.item_ids[i]).second) {
      throw ValidationError("duplicate item " +
                            std::to_string(pool.item_ids[i]) + " in pool");
    }
    if (!std::isfinite(pool.scores[i])) {
      throw ValidationError("non-finite score in pool");
    }
  }
}

std::vector<std::size_t> list_positions(const ScoredPool& pool,
                                        const RankedList& list) {
  validate_pool(pool);
  if (list.size() == 0 || list.size() > pool.size()) {
    throw ValidationError("list length must be in [1, pool size]");
  }
  std::vector<std::size_t> positions;
  positions.reserve(list.size());
  std::vector<bool> used(pool.size(), false);
  for (ItemId id : list.items) {
    auto it = std::find(pool.item_ids.begin(), pool.item_ids.end(), id);
    if (it == pool.item_ids.end()) {
      throw ValidationError("item " + std::to_string(id) + " not in pool");
    }
    const auto idx = static_cast<std::size_t>(it - pool.item_ids.begin());
    if (used[idx]) {
      throw ValidationError("item " + std::to_string(id) +
                            " listed more than once");
    }
    used[idx] = true;
    positions.push_back(idx);
  }
  return positions;
}

namespace {

// log sum_{j remaining} exp(s_j), max-shifted.
double log_sum_exp_remaining(const std::vector<double>& scores,
                             const std::vector<bool>& placed) {
  double top = -std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < scores.size(); ++j) {
    if (!placed[j]) top = std::max(top, scores[j]);
  }
  double total = 0.0;
  for (std::size_t j = 0; j < scores.size(); ++j) {
    if (!placed[j]) total += std::exp(scores[j] - top);
  }
  return top + std::log(total);
}

}  // namespace

double pl_log_probability(const ScoredPool& pool, const RankedList& list) {
  const auto positions = list_positions(pool, list);
  std::vector<bool> placed(pool.size(), false);
  double log_prob = 0.0;
  for (std::size_t idx : positions) {
    log_prob += pool.scores[idx] - log_sum_exp_remaining(pool.scores, placed);
    placed[idx] = true;
  }
  return log_prob;
}

double pl_probability(const ScoredPool& pool, const RankedList& list) {
  return std::exp(pl_log_probability(pool, list));
}

RankedList pl_sample(const ScoredPool& pool, std::size_t k, Rng& rng) {
  validate_pool(pool);
  if (k == 0 || k > pool.size()) {
    throw ConfigError("cannot sample " + std::to_string(k) + " items from a " +
                      std::to_string(pool.size()) + "-item pool");
  }
  const std::size_t c = pool.size();
  std::vector<bool> placed(c, false);
  std::vector<double> weights(c, 0.0);
  RankedList list;
  list.items.reserve(k);
  for (std::size_t stage = 0; stage < k; ++stage) {
    double top = -std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < c; ++j) {
      if (!placed[j]) top = std::max(top, pool.scores[j]);
    }
    double total = 0.0;
    std::size_t last = c;
    for (std::size_t j = 0; j < c; ++j) {
      weights[j] = placed[j] ? 0.0 : std::exp(pool.scores[j] - top);
      total += weights[j];
      if (!placed[j]) last = j;
    }
    const double target = uniform01(rng) * total;
    double cumulative = 0.0;
    std::size_t pick = last;  // guards against rounding at the upper end
    for (std::size_t j = 0; j < c; ++j) {
      if (placed[j]) continue;
      cumulative += weights[j];
      if (target < cumulative) {
        pick = j;
        break;
      }
    }
    placed[pick] = true;
    list.items.push_back(pool.item_ids[pick]);
  }
  return list;
}

std::vector<double> pl_log_prob_grad(const ScoredPool& pool,
                                     const RankedList& list) {
  const auto positions = list_positions(pool, list);
  const std::size_t c = pool.size();
  std::vector<bool> placed(c, false);
  std::vector<double> grad(c, 0.0);
  for (std::size_t idx : positions) {
    const double lse = log_sum_exp_remaining(pool.scores, placed);
    for (std::size_t j = 0; j < c; ++j) {
      if (!placed[j]) grad[j] -= std::exp(pool.scores[j] - lse);
    }
    grad[idx] += 1.0;
    placed[idx] = true;
  }
  return grad;
}

std::vector<EnumeratedList> enumerate_lists(const ScoredPool& pool,
                                            std::size_t k) {
  validate_pool(pool);
  if (pool.size() > 6) {
    throw ConfigError("enumeration is limited to pools of at most 6 items");
  }
  if (k == 0 || k > pool.size()) {
    throw ConfigError("list length must be in [1, pool size]");
  }
  std::vector<EnumeratedList> out;
  std::vector<std::size_t> order(pool.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  // Permutations in lexicographic order; each distinct k-prefix is emitted
  // once, when the tail after it is sorted ascending.
  do {
    if (!std::is_sorted(order.begin() + static_cast<std::ptrdiff_t>(k),
                        order.end())) {
      continue;
    }
    RankedList list;
    for (std::size_t i = 0; i < k; ++i) {
      list.items.push_back(pool.item_ids[order[i]]);
    }
    const double p = pl_probability(pool, list);
    out.push_back({std::move(list), p});
  } while (std::next_permutation(order.begin(), order.end()));
  return out;
}

}  // namespace oltr
