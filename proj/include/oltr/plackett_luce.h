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

#ifndef OLTR_PLACKETT_LUCE_H_
#define OLTR_PLACKETT_LUCE_H_

#include <cstdint>
#include <vector>

#include "oltr/rng.h"

namespace oltr {

using ItemId = std::int64_t;

// Candidate items for one query together with their scores s_i = f(x_i; q).
struct ScoredPool {
  std::vector<ItemId> item_ids;
  std::vector<double> scores;

  std::size_t size() const { return item_ids.size(); }
};

// The k items shown for one query, top position first.
struct RankedList {
  std::vector<ItemId> items;

  std::size_t size() const { return items.size(); }
  bool operator==(const RankedList&) const = default;
};

// Checks the pool invariants (distinct ids, one finite score per id) and
// throws ValidationError otherwise.
void validate_pool(const ScoredPool& pool);

// Maps every list entry to its index in the pool. Throws ValidationError for
// duplicate entries, foreign ids, or an empty list.
std::vector<std::size_t> list_positions(const ScoredPool& pool,
                                        const RankedList& list);

// Plackett-Luce probability of drawing `list` as the first k picks from the
// pool. The denominator at each stage runs over every pool item that has not
// been placed yet, so for k < c the value is the marginal probability of
// this top-k prefix.
double pl_probability(const ScoredPool& pool, const RankedList& list);
double pl_log_probability(const ScoredPool& pool, const RankedList& list);

// Draws k items without replacement, each stage from the softmax over the
// remaining pool scores. Throws ConfigError unless 1 <= k <= c.
RankedList pl_sample(const ScoredPool& pool, std::size_t k, Rng& rng);

// d log PL(list) / d scores, one entry per pool item (pool order). Entries
// sum to zero.
std::vector<double> pl_log_prob_grad(const ScoredPool& pool,
                                     const RankedList& list);

// Every ordered k-subset of the pool with its probability, for c <= 6.
// Test oracle for the sampler and for "best list" searches.
struct EnumeratedList {
  RankedList list;
  double probability;
};
std::vector<EnumeratedList> enumerate_lists(const ScoredPool& pool,
                                            std::size_t k);

}  // namespace oltr

#endif  // OLTR_PLACKETT_LUCE_H_
