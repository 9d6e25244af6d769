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

#include "oltr/learners.h"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>

#include "oltr/errors.h"

namespace oltr {

std::string to_string(LearnerKind kind) {
  switch (kind) {
    case LearnerKind::kPGLearn:
      return "pglearn";
    case LearnerKind::kRegLearn:
      return "reglearn";
    case LearnerKind::kOracleLearn:
      return "oraclelearn";
  }
  return "unknown";
}

LearnerKind parse_learner_kind(const std::string& name) {
  std::string lower = name;
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char ch) { return std::tolower(ch); });
  if (lower == "pglearn") return LearnerKind::kPGLearn;
  if (lower == "reglearn") return LearnerKind::kRegLearn;
  if (lower == "oraclelearn") return LearnerKind::kOracleLearn;
  throw ConfigError("unknown learner '" + name +
                    "' (expected pglearn, reglearn or oraclelearn)");
}

void LearnerConfig::validate() const {
  if (!(epsilon >= 0.0 && epsilon <= 1.0)) {
    throw ConfigError("epsilon must be in [0, 1]");
  }
  if (k == 0) throw ConfigError("list size k must be positive");
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) {
    throw ConfigError("learning rate must be positive and finite");
  }
  const bool is_oracle = kind == LearnerKind::kOracleLearn;
  if (is_oracle != oracle_weights.has_value()) {
    throw ConfigError(
        "oracle weights must be given for OracleLearn and only for it");
  }
  if (is_oracle && oracle_weights->size() != k) {
    throw ConfigError("oracle weights need exactly k = " + std::to_string(k) +
                      " entries");
  }
}

RankedList greedy_top_k(const ScoredPool& pool, std::size_t k) {
  validate_pool(pool);
  if (k == 0 || k > pool.size()) {
    throw ConfigError("list size " + std::to_string(k) +
                      " must be in [1, pool size " +
                      std::to_string(pool.size()) + "]");
  }
  std::vector<std::size_t> order(pool.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k),
                    order.end(), [&](std::size_t a, std::size_t b) {
                      if (pool.scores[a] != pool.scores[b]) {
                        return pool.scores[a] > pool.scores[b];
                      }
                      return pool.item_ids[a] < pool.item_ids[b];
                    });
  RankedList list;
  list.items.reserve(k);
  for (std::size_t i = 0; i < k; ++i) {
    list.items.push_back(pool.item_ids[order[i]]);
  }
  return list;
}

RankedList random_top_k(const ScoredPool& pool, std::size_t k, Rng& rng) {
  if (k == 0 || k > pool.size()) {
    throw ConfigError("list size " + std::to_string(k) +
                      " must be in [1, pool size " +
                      std::to_string(pool.size()) + "]");
  }
  std::vector<ItemId> ids = pool.item_ids;
  for (std::size_t i = 0; i < k; ++i) {
    const auto j = i + uniform_index(rng, ids.size() - i);
    std::swap(ids[i], ids[j]);
  }
  ids.resize(k);
  return RankedList{std::move(ids)};
}

GeneratedList generate_results(const ScoredPool& pool, std::size_t k,
                               double epsilon, LearnerKind kind, Rng& rng) {
  if (k == 0 || k > pool.size()) {
    throw ConfigError("list size " + std::to_string(k) +
                      " must be in [1, pool size " +
                      std::to_string(pool.size()) + "]");
  }
  if (!(epsilon >= 0.0 && epsilon <= 1.0)) {
    throw ConfigError("epsilon must be in [0, 1]");
  }
  if (uniform01(rng) < epsilon) {
    return {random_top_k(pool, k, rng), true};
  }
  if (kind == LearnerKind::kPGLearn) return {pl_sample(pool, k, rng), false};
  return {greedy_top_k(pool, k), false};
}

namespace {

void check_record(const InteractionRecord& record, const ScoringModel& model) {
  if (record.features.cols() != static_cast<Eigen::Index>(record.pool.size()) ||
      record.features.rows() != model.input_dim()) {
    throw ShapeError("record features must be d x pool size");
  }
  if (record.query < 0 || record.query >= model.num_outputs()) {
    throw ShapeError("record query outside the scorer's outputs");
  }
  if (!std::isfinite(record.reward)) {
    throw NumericError("non-finite reward in interaction record");
  }
}

}  // namespace

Vector pg_gradient(const ScoringModel& model,
                   std::span<const InteractionRecord> batch,
                   bool use_reward_baseline) {
  if (batch.empty()) throw ConfigError("policy-gradient batch is empty");
  double baseline = 0.0;
  if (use_reward_baseline) {
    for (const auto& r : batch) baseline += r.reward;
    baseline /= static_cast<double>(batch.size());
  }
  const double inv_n = 1.0 / static_cast<double>(batch.size());

  // Records with zero advantage contribute nothing and are skipped.
  Eigen::Index columns = 0;
  for (const auto& record : batch) {
    check_record(record, model);
    if (record.reward - baseline != 0.0) columns += record.features.cols();
  }
  Matrix inputs(model.input_dim(), columns);
  Matrix output_grads = Matrix::Zero(model.num_outputs(), columns);
  Eigen::Index col = 0;
  for (const auto& record : batch) {
    const double advantage = record.reward - baseline;
    if (advantage == 0.0) continue;
    const auto grad = pl_log_prob_grad(record.pool, record.list);
    const Eigen::Index c = record.features.cols();
    inputs.middleCols(col, c) = record.features;
    for (Eigen::Index j = 0; j < c; ++j) {
      output_grads(record.query, col + j) = -advantage * inv_n * grad[j];
    }
    col += c;
  }
  if (columns == 0) return Vector::Zero(model.num_parameters());
  return backward_sum(model, inputs, output_grads);
}

void pg_update(ScoringModel& model, AdamState& adam,
               std::span<const InteractionRecord> batch,
               bool use_reward_baseline) {
  const Vector grad = pg_gradient(model, batch, use_reward_baseline);
  adam_step(model, adam, grad);
}

double reg_predict(const DiscountWeights& weights,
                   std::span<const double> list_scores) {
  if (list_scores.size() != weights.size()) {
    throw ShapeError("expected " + std::to_string(weights.size()) +
                     " list scores, got " + std::to_string(list_scores.size()));
  }
  double r = 0.0;
  for (std::size_t i = 0; i < list_scores.size(); ++i) {
    r += weights.w(static_cast<Eigen::Index>(i)) * list_scores[i];
  }
  return r;
}

RegLossGradient reg_loss_gradient(const Vector& weights,
                                  const Vector& list_scores, double reward) {
  if (weights.size() != list_scores.size()) {
    throw ShapeError("weights and list scores differ in length");
  }
  const double residual = weights.dot(list_scores) - reward;
  return {0.5 * residual * residual, residual * list_scores,
          residual * weights};
}

RegGradients reg_gradients(const ScoringModel& model,
                           const DiscountWeights& weights,
                           std::span<const InteractionRecord> batch) {
  if (batch.empty()) throw ConfigError("regression batch is empty");
  const auto k = static_cast<Eigen::Index>(weights.size());
  Matrix inputs(model.input_dim(), k * static_cast<Eigen::Index>(batch.size()));
  for (std::size_t r = 0; r < batch.size(); ++r) {
    const auto& record = batch[r];
    check_record(record, model);
    if (record.list.size() != weights.size()) {
      throw ShapeError("list length " + std::to_string(record.list.size()) +
                       " does not match " + std::to_string(weights.size()) +
                       " position weights");
    }
    const auto positions = list_positions(record.pool, record.list);
    for (Eigen::Index i = 0; i < k; ++i) {
      inputs.col(static_cast<Eigen::Index>(r) * k + i) =
          record.features.col(static_cast<Eigen::Index>(positions[i]));
    }
  }
  const Matrix scores = forward_batch(model, inputs);

  const double inv_n = 1.0 / static_cast<double>(batch.size());
  RegGradients out;
  out.weights = Vector::Zero(k);
  Matrix output_grads = Matrix::Zero(model.num_outputs(), inputs.cols());
  Vector list_scores(k);
  for (std::size_t r = 0; r < batch.size(); ++r) {
    const auto base = static_cast<Eigen::Index>(r) * k;
    const int q = batch[r].query;
    for (Eigen::Index i = 0; i < k; ++i) list_scores(i) = scores(q, base + i);
    const auto g = reg_loss_gradient(weights.w, list_scores, batch[r].reward);
    out.loss += g.loss * inv_n;
    out.weights += g.weight_grad * inv_n;
    for (Eigen::Index i = 0; i < k; ++i) {
      output_grads(q, base + i) = g.score_grad(i) * inv_n;
    }
  }
  if (!std::isfinite(out.loss)) {
    throw NumericError("non-finite regression loss");
  }
  out.theta = backward_sum(model, inputs, output_grads);
  if (!out.theta.allFinite() || !out.weights.allFinite()) {
    throw NumericError("non-finite regression gradient");
  }
  return out;
}

double reg_update(ScoringModel& model, DiscountWeights& weights,
                  AdamState& model_adam, AdamState& weight_adam,
                  std::span<const InteractionRecord> batch,
                  bool update_scorer) {
  if (!weights.trainable) {
    throw ConfigError("reg_update needs trainable position weights");
  }
  const RegGradients g = reg_gradients(model, weights, batch);
  // Stage both steps so a failure in either leaves everything untouched.
  Vector params = model.parameters();
  AdamState next_model_adam = model_adam;
  if (update_scorer) adam_step(params, next_model_adam, g.theta);
  Vector w = weights.w;
  AdamState next_weight_adam = weight_adam;
  adam_step(w, next_weight_adam, g.weights);
  model.parameters() = std::move(params);
  model_adam = std::move(next_model_adam);
  weights.w = std::move(w);
  weight_adam = std::move(next_weight_adam);
  return g.loss;
}

double oracle_update(ScoringModel& model, const DiscountWeights& fixed_weights,
                     AdamState& model_adam,
                     std::span<const InteractionRecord> batch) {
  if (fixed_weights.trainable) {
    throw ConfigError("oracle_update needs frozen position weights");
  }
  const RegGradients g = reg_gradients(model, fixed_weights, batch);
  adam_step(model, model_adam, g.theta);
  return g.loss;
}

Learner::Learner(LearnerConfig config, ScoringModel model)
    : config_(std::move(config)), model_(std::move(model)) {
  config_.validate();
  model_adam_ = AdamState::for_size(model_.num_parameters(),
                                    config_.learning_rate);
  const auto k = static_cast<Eigen::Index>(config_.k);
  switch (config_.kind) {
    case LearnerKind::kPGLearn:
      weights_.trainable = false;
      break;
    case LearnerKind::kRegLearn:
      weights_.w = Vector::Ones(k);
      weights_.trainable = true;
      weight_adam_ = AdamState::for_size(k, config_.learning_rate);
      break;
    case LearnerKind::kOracleLearn:
      weights_.w = Eigen::Map<const Vector>(config_.oracle_weights->data(), k);
      weights_.trainable = false;
      break;
  }
}

double Learner::update(std::span<const InteractionRecord> batch) {
  switch (config_.kind) {
    case LearnerKind::kPGLearn:
      pg_update(model_, model_adam_, batch, config_.use_reward_baseline);
      return std::numeric_limits<double>::quiet_NaN();
    case LearnerKind::kRegLearn:
      return reg_update(model_, weights_, model_adam_, weight_adam_, batch);
    case LearnerKind::kOracleLearn:
      return oracle_update(model_, weights_, model_adam_, batch);
  }
  return std::numeric_limits<double>::quiet_NaN();
}

nlohmann::json to_json(const LearnerConfig& config) {
  nlohmann::json j = {{"kind", to_string(config.kind)},
                      {"epsilon", config.epsilon},
                      {"k", config.k},
                      {"use_reward_baseline", config.use_reward_baseline},
                      {"learning_rate", config.learning_rate}};
  j["oracle_weights"] = config.oracle_weights
                            ? nlohmann::json(*config.oracle_weights)
                            : nlohmann::json(nullptr);
  return j;
}

LearnerConfig learner_config_from_json(const nlohmann::json& j) {
  LearnerConfig config;
  config.kind = parse_learner_kind(j.at("kind").get<std::string>());
  config.epsilon = j.at("epsilon").get<double>();
  config.k = j.at("k").get<std::size_t>();
  config.use_reward_baseline = j.value("use_reward_baseline", false);
  config.learning_rate = j.value("learning_rate", 1e-4);
  if (j.contains("oracle_weights") && !j["oracle_weights"].is_null()) {
    config.oracle_weights = j["oracle_weights"].get<std::vector<double>>();
  }
  return config;
}

nlohmann::json Learner::to_json() const {
  nlohmann::json j = {{"format", "oltr-checkpoint"},
                      {"version", 1},
                      {"learner", oltr::to_json(config_)},
                      {"model", oltr::to_json(model_)},
                      {"adam", oltr::to_json(model_adam_)}};
  j["weights"] = {
      {"w", std::vector<double>(weights_.w.data(),
                                weights_.w.data() + weights_.w.size())},
      {"trainable", weights_.trainable}};
  if (config_.kind == LearnerKind::kRegLearn) {
    j["weight_adam"] = oltr::to_json(weight_adam_);
  }
  return j;
}

Learner Learner::from_json(const nlohmann::json& j) {
  Learner learner(learner_config_from_json(j.at("learner")),
                  model_from_json(j.at("model")));
  learner.model_adam_ = adam_from_json(j.at("adam"));
  if (learner.model_adam_.first_moment.size() !=
      learner.model_.num_parameters()) {
    throw ShapeError("Adam state does not match model parameters");
  }
  const auto w = j.at("weights").at("w").get<std::vector<double>>();
  if (learner.kind() != LearnerKind::kPGLearn && w.size() != learner.config_.k) {
    throw ShapeError("checkpoint position weights do not match k");
  }
  learner.weights_.w =
      Eigen::Map<const Vector>(w.data(), static_cast<Eigen::Index>(w.size()));
  learner.weights_.trainable = j.at("weights").at("trainable").get<bool>();
  if (learner.kind() == LearnerKind::kRegLearn) {
    learner.weight_adam_ = adam_from_json(j.at("weight_adam"));
  }
  return learner;
}

void save_learner_checkpoint(const std::string& path, const Learner& learner) {
  std::ofstream out(path);
  if (!out) throw Error("cannot open " + path + " for writing");
  out << learner.to_json().dump() << '\n';
}

Learner load_learner_checkpoint(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path);
  const auto j = nlohmann::json::parse(in);
  if (!j.contains("learner")) {
    throw ConfigError(path + " holds a bare scorer, not a learner checkpoint");
  }
  return Learner::from_json(j);
}

}  // namespace oltr
