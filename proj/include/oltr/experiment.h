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

#ifndef OLTR_EXPERIMENT_H_
#define OLTR_EXPERIMENT_H_

#include <cstdint>
#include <functional>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "oltr/feedback.h"
#include "oltr/learners.h"
#include "oltr/scorer.h"

namespace oltr {

struct DatasetParams {
  int num_queries = 10;
  int num_items = 2000;
  int feature_dim = 16;
  double multi_relevance_prob = 0.2;  // chance an item has two queries
  double noise_scale = 0.3;
  double train_fraction = 0.8;
  double min_prototype_angle_deg = 60.0;
};

enum class Split { kTrain, kTest };

// Items of the filtering task: each item is relevant to one or two standing
// queries and belongs to exactly one split.
class Dataset {
 public:
  int num_queries() const { return num_queries_; }
  int feature_dim() const { return static_cast<int>(features_.rows()); }
  std::size_t num_items() const {
    return static_cast<std::size_t>(features_.cols());
  }

  // d x n; column i is item i.
  const Matrix& features() const { return features_; }
  // d x m; column q is the prototype of query q.
  const Matrix& prototypes() const { return prototypes_; }

  bool relevant(ItemId item, int query) const {
    return relevance_[static_cast<std::size_t>(item) *
                          static_cast<std::size_t>(num_queries_) +
                      static_cast<std::size_t>(query)] != 0;
  }
  // Relevant queries of an item; the first entry is its primary query.
  const std::vector<int>& relevance_set(ItemId item) const {
    return relevance_sets_[static_cast<std::size_t>(item)];
  }
  const std::vector<ItemId>& split(Split s) const {
    return s == Split::kTrain ? train_ : test_;
  }
  bool in_split(ItemId item, Split s) const {
    return in_test_[static_cast<std::size_t>(item)] == (s == Split::kTest);
  }
  const std::vector<ItemId>& relevant_items(Split s, int query) const {
    return (s == Split::kTrain ? train_relevant_ : test_relevant_)[query];
  }

  // Throws DatasetError if a query has fewer than k relevant items in a
  // split, an item has no relevant query, or the splits overlap.
  void check_invariants(std::size_t k) const;

  // Assembles a dataset from explicit parts; used by the generator and by
  // tests that need hand-built corpora.
  static Dataset from_parts(Matrix features, Matrix prototypes,
                            std::vector<std::vector<int>> relevance_sets,
                            std::vector<bool> in_test);

 private:
  int num_queries_ = 0;
  Matrix features_;
  Matrix prototypes_;
  std::vector<std::uint8_t> relevance_;
  std::vector<std::vector<int>> relevance_sets_;
  std::vector<bool> in_test_;
  std::vector<ItemId> train_;
  std::vector<ItemId> test_;
  std::vector<std::vector<ItemId>> train_relevant_;
  std::vector<std::vector<ItemId>> test_relevant_;
};

// Synthetic stand-in for an image corpus. Query prototypes are random unit
// vectors at least `min_prototype_angle_deg` apart; an item's feature is the
// mean of its queries' prototypes plus N(0, noise_scale^2) noise. The split
// is stratified by primary query. Throws ConfigError when n < 2 m k and
// DatasetError when the result violates check_invariants(k).
Dataset generate_synthetic_dataset(const DatasetParams& params, std::size_t k,
                                   std::uint64_t seed);

// Query plus candidate pool for one simulated request.
struct Interaction {
  int query = 0;
  std::vector<ItemId> pool;
  std::vector<std::uint8_t> relevance;  // per pool item, for `query`
  std::size_t num_relevant = 0;
};

// Uniform query, c distinct uniform items from the split; if none is
// relevant, one uniformly chosen slot is replaced by a uniformly chosen
// relevant item.
Interaction sample_interaction(const Dataset& dataset, Split split,
                               std::size_t k, std::size_t c, Rng& rng);

enum class FeedbackKind { kNdcg, kClicks };
std::string to_string(FeedbackKind kind);
FeedbackKind parse_feedback_kind(const std::string& name);

struct ExperimentConfig {
  LearnerKind learner = LearnerKind::kRegLearn;
  double epsilon = 0.1;
  std::size_t k = 5;
  FeedbackKind feedback = FeedbackKind::kNdcg;
  std::string click_config = "perfect";
  std::string click_config_file;  // empty: built-in configurations
  std::size_t pool_size = 20;
  std::size_t batch_size = 100;
  std::size_t num_batches = 5000;
  std::uint64_t seed = 1;          // model init and interaction streams
  std::uint64_t dataset_seed = 1;  // synthetic corpus
  DatasetParams dataset;
  std::vector<int> hidden_layers = {64, 64};
  double learning_rate = 1e-4;
  bool use_reward_baseline = false;
  std::size_t eval_batches = 150;
  std::size_t eval_batch_size = 100;

  // Throws ConfigError on inconsistent settings, including a click
  // configuration with fewer examination probabilities than k.
  void validate() const;
};

nlohmann::json to_json(const ExperimentConfig& config);
ExperimentConfig experiment_config_from_json(const nlohmann::json& j);

// Click model selected by the configuration (built-in or from file).
ClickConfig resolve_click_config(const ExperimentConfig& config);

// Position weights of the feedback: nDCG discounts or PBM examination.
std::vector<double> ground_truth_weights(const ExperimentConfig& config);

Dataset make_dataset(const ExperimentConfig& config);
Learner make_learner(const ExperimentConfig& config, const Dataset& dataset);

struct MetricsRow {
  std::size_t batch = 0;        // 1-based
  double mean_ndcg = 0.0;       // shown lists of this batch
  double running_ndcg = 0.0;    // all shown lists so far
  double loss = 0.0;            // NaN where undefined
  std::vector<double> weights;  // empty where undefined
  std::size_t explored = 0;     // explored lists in this batch
};

struct MetricsLog {
  std::size_t k = 0;
  std::vector<MetricsRow> rows;

  // Header: batch,mean_ndcg,running_ndcg,loss,w_1..w_k.
  void write_csv(std::ostream& out) const;
};

struct OnlineResult {
  MetricsLog log;
  Learner learner;
  std::size_t interactions = 0;
  std::size_t explored = 0;
  std::optional<std::string> error;  // set when an update was rejected

  double final_running_ndcg() const {
    return log.rows.empty() ? 0.0 : log.rows.back().running_ndcg;
  }
};

// Simulates the online loop: per batch, draw interactions, score pools,
// show epsilon-greedy lists, collect feedback, then one learner update. The
// logged metric is nDCG@k of the shown lists for every feedback kind.
OnlineResult run_online(const ExperimentConfig& config, const Dataset& dataset,
                        Learner learner);
OnlineResult run_online(const ExperimentConfig& config, const Dataset& dataset);

// Scores of every pool item for a batch of interactions.
using BatchScorer = std::function<std::vector<std::vector<double>>(
    std::span<const Interaction>)>;

BatchScorer model_scorer(const ScoringModel& model, const Dataset& dataset);

struct OfflineResult {
  double mean = 0.0;
  std::vector<double> batch_means;
};

// Greedy top-k of `scorer` on eval_batches x eval_batch_size test-split
// interactions. Pools depend only on the seed, so learners evaluated with
// the same seed see the same requests.
OfflineResult evaluate_offline(const BatchScorer& scorer,
                               const Dataset& dataset,
                               const ExperimentConfig& config);
OfflineResult evaluate_offline(const ScoringModel& model,
                               const Dataset& dataset,
                               const ExperimentConfig& config);

// Uniformly random lists on the same pools evaluate_offline() uses.
OfflineResult evaluate_random(const Dataset& dataset,
                              const ExperimentConfig& config);

// Monte Carlo expectation of nDCG@k for uniformly random lists.
double random_baseline_ndcg(const Dataset& dataset, Split split, std::size_t k,
                            std::size_t c, std::size_t draws,
                            std::uint64_t seed);

enum class TTestVariant { kWelch, kPooled };

// Two-tailed p-value of a two-sample t-test. Throws ContractError when a
// sample has fewer than two values or both samples have zero variance.
double t_test_two_tailed(std::span<const double> a, std::span<const double> b,
                         TTestVariant variant = TTestVariant::kWelch);

struct WeightComparison {
  double distance = 0.0;
  bool strictly_decreasing = false;
  bool order_matches = false;  // same descending order as ground truth
};

WeightComparison weight_distance(std::span<const double> learned,
                                 std::span<const double> ground_truth);

// Mean and sample standard deviation.
double mean_of(std::span<const double> values);
double stddev_of(std::span<const double> values);

}  // namespace oltr

#endif  // OLTR_EXPERIMENT_H_
