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

#ifndef OLTR_FEEDBACK_H_
#define OLTR_FEEDBACK_H_

#include <cstdint>
#include <istream>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "oltr/rng.h"

namespace oltr {

// 1 / log2(i + 1) for positions i = 1..k.
std::vector<double> ndcg_discounts(std::size_t k);

// Binary-gain nDCG@k of a shown list. IDCG is the best DCG achievable from
// the candidate pool, i.e. min(k, num_relevant_in_pool) relevant items on
// top. Only the first k relevances are read; fewer than k throws
// ShapeError, num_relevant_in_pool == 0 throws ContractError.
double ndcg_at_k(std::span<const std::uint8_t> list_relevances,
                 std::size_t num_relevant_in_pool, std::size_t k);

// Position-based click model parameters.
struct ClickConfig {
  std::string name;
  double p_attract_relevant = 1.0;    // p(a | R)
  double p_attract_irrelevant = 0.0;  // p(a | IR)
  std::vector<double> examination;    // per position, top first

  // Throws ConfigError when a probability is outside [0, 1].
  void validate() const;
};

// Examination probabilities of the top five positions fitted on the Yandex
// relevance-prediction click log.
const std::vector<double>& default_examination();

// A named family of attraction settings sharing one examination vector.
class ClickConfigSet {
 public:
  // perfect (1.0, 0.0), locating (0.95, 0.05), entertaining (0.9, 0.4).
  static ClickConfigSet defaults();

  // Plain-text format, one entry per line, '#' starts a comment:
  //   <name> <p(a|R)> <p(a|IR)>
  //   examination <p_1> <p_2> ...
  // Entries override the defaults by name.
  static ClickConfigSet parse(std::istream& in);
  static ClickConfigSet load(const std::string& path);

  // The named configuration cut to the first k positions. Throws
  // ConfigError for an unknown name or when k exceeds the number of
  // examination probabilities.
  ClickConfig get(const std::string& name, std::size_t k) const;

  std::vector<std::string> names() const;
  const std::vector<double>& examination() const { return examination_; }

 private:
  struct Attraction {
    double relevant;
    double irrelevant;
  };
  std::map<std::string, Attraction> attraction_;
  std::vector<double> examination_;
};

// Independent Bernoulli click per position with probability
// examination_i * p(a | rel_i). Throws ShapeError when the configuration
// has fewer examination entries than the list.
std::vector<std::uint8_t> simulate_clicks_pbm(
    std::span<const std::uint8_t> list_relevances, const ClickConfig& config,
    Rng& rng);

// List-level CTR feedback: the raw number of clicks.
double ctr_feedback(std::span<const std::uint8_t> clicks);

}  // namespace oltr

#endif  // OLTR_FEEDBACK_H_
