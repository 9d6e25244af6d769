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

#ifndef OLTR_LEARNERS_H_
#define OLTR_LEARNERS_H_

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "oltr/plackett_luce.h"
#include "oltr/rng.h"
#include "oltr/scorer.h"

namespace oltr {

enum class LearnerKind { kPGLearn, kRegLearn, kOracleLearn };

std::string to_string(LearnerKind kind);
// Accepts "pglearn", "reglearn", "oraclelearn" (case-insensitive).
LearnerKind parse_learner_kind(const std::string& name);

// Position weights of the final weighted-sum layer.
struct DiscountWeights {
  Vector w;
  bool trainable = true;

  std::size_t size() const { return static_cast<std::size_t>(w.size()); }
};

// One shown list with its feedback.
struct InteractionRecord {
  int query = 0;
  ScoredPool pool;  // scores from the model that produced `list`
  Matrix features;  // d x c, column j describes pool.item_ids[j]
  RankedList list;
  double reward = 0.0;
  bool explored = false;
};

struct LearnerConfig {
  LearnerKind kind = LearnerKind::kRegLearn;
  double epsilon = 0.1;
  std::size_t k = 5;
  std::optional<std::vector<double>> oracle_weights;
  bool use_reward_baseline = false;
  double learning_rate = 1e-4;

  void validate() const;
};

struct GeneratedList {
  RankedList list;
  bool explored = false;
};

// Top-k by descending score, ties by ascending item id.
RankedList greedy_top_k(const ScoredPool& pool, std::size_t k);

// Uniformly random k-permutation of the pool.
RankedList random_top_k(const ScoredPool& pool, std::size_t k, Rng& rng);

// Epsilon-greedy list generation. With probability epsilon the list is a
// uniformly random k-permutation (explored = true). Otherwise RegLearn and
// OracleLearn show greedy_top_k() and PGLearn shows a Plackett-Luce sample.
GeneratedList generate_results(const ScoredPool& pool, std::size_t k,
                               double epsilon, LearnerKind kind, Rng& rng);

// Policy-gradient direction for the minimizing optimizer:
//   -(1/N) sum_records (r - b) * d log PL(list) / d theta
// where b is the batch mean reward if `use_reward_baseline`, else 0. Uses the
// pool scores stored in each record.
Vector pg_gradient(const ScoringModel& model,
                   std::span<const InteractionRecord> batch,
                   bool use_reward_baseline = false);

// One Adam step along pg_gradient(). Throws NumericError (state unchanged)
// on non-finite values.
void pg_update(ScoringModel& model, AdamState& adam,
               std::span<const InteractionRecord> batch,
               bool use_reward_baseline = false);

// Predicted list feedback: sum_i w_i * list_scores_i.
double reg_predict(const DiscountWeights& weights,
                   std::span<const double> list_scores);

// L = 0.5 (r - r_hat)^2 for one list and its gradients with respect to the
// position weights and the shown items' scores.
struct RegLossGradient {
  double loss = 0.0;
  Vector weight_grad;
  Vector score_grad;
};
RegLossGradient reg_loss_gradient(const Vector& weights,
                                  const Vector& list_scores, double reward);

// Batch-averaged squared loss and its gradients. Scores of the shown items
// are recomputed from `model`.
struct RegGradients {
  double loss = 0.0;
  Vector theta;
  Vector weights;
};
RegGradients reg_gradients(const ScoringModel& model,
                           const DiscountWeights& weights,
                           std::span<const InteractionRecord> batch);

// Updates theta (unless `update_scorer` is false) and w with separate Adam
// states. Returns the pre-update batch loss. Frozen weights throw
// ConfigError; non-finite values throw NumericError with nothing changed.
double reg_update(ScoringModel& model, DiscountWeights& weights,
                  AdamState& model_adam, AdamState& weight_adam,
                  std::span<const InteractionRecord> batch,
                  bool update_scorer = true);

// reg_update() with the weight gradient discarded. Requires frozen weights.
double oracle_update(ScoringModel& model, const DiscountWeights& fixed_weights,
                     AdamState& model_adam,
                     std::span<const InteractionRecord> batch);

// A scorer plus whatever state its learning rule needs.
class Learner {
 public:
  Learner(LearnerConfig config, ScoringModel model);

  const LearnerConfig& config() const { return config_; }
  LearnerKind kind() const { return config_.kind; }
  const ScoringModel& model() const { return model_; }
  ScoringModel& mutable_model() { return model_; }
  const AdamState& model_adam() const { return model_adam_; }
  // Empty for PGLearn.
  const DiscountWeights& weights() const { return weights_; }
  DiscountWeights& mutable_weights() { return weights_; }
  const AdamState& weight_adam() const { return weight_adam_; }

  // Applies the learner's update rule to one batch. Returns the batch
  // regression loss, or NaN for PGLearn.
  double update(std::span<const InteractionRecord> batch);

  nlohmann::json to_json() const;
  static Learner from_json(const nlohmann::json& j);

 private:
  LearnerConfig config_;
  ScoringModel model_;
  AdamState model_adam_;
  DiscountWeights weights_;
  AdamState weight_adam_;
};

nlohmann::json to_json(const LearnerConfig& config);
LearnerConfig learner_config_from_json(const nlohmann::json& j);

// The checkpoint is a superset of the scorer container, so
// load_model_checkpoint() also reads it.
void save_learner_checkpoint(const std::string& path, const Learner& learner);
Learner load_learner_checkpoint(const std::string& path);

}  // namespace oltr

#endif  // OLTR_LEARNERS_H_
