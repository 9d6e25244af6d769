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

#include "oltr/experiment.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include <boost/math/distributions/students_t.hpp>

#include "oltr/errors.h"
#include "oltr/format.h"

namespace oltr {

namespace {

// Independent random streams derived from the run seed.
enum Stream : std::uint64_t {
  kTrainStream = 1,
  kEvalStream = 2,
  kBaselineStream = 3,
  kModelStream = 4,
  kDatasetStream = 5,
};

}  // namespace

Dataset Dataset::from_parts(Matrix features, Matrix prototypes,
                            std::vector<std::vector<int>> relevance_sets,
                            std::vector<bool> in_test) {
  const auto n = static_cast<std::size_t>(features.cols());
  if (relevance_sets.size() != n || in_test.size() != n) {
    throw ShapeError("dataset parts disagree on the number of items");
  }
  if (prototypes.rows() != features.rows()) {
    throw ShapeError("prototypes and features differ in dimension");
  }
  Dataset ds;
  ds.num_queries_ = static_cast<int>(prototypes.cols());
  ds.features_ = std::move(features);
  ds.prototypes_ = std::move(prototypes);
  ds.relevance_sets_ = std::move(relevance_sets);
  ds.in_test_ = std::move(in_test);
  const auto m = static_cast<std::size_t>(ds.num_queries_);
  ds.relevance_.assign(n * m, 0);
  ds.train_relevant_.assign(m, {});
  ds.test_relevant_.assign(m, {});
  for (std::size_t i = 0; i < n; ++i) {
    const auto id = static_cast<ItemId>(i);
    (ds.in_test_[i] ? ds.test_ : ds.train_).push_back(id);
    for (int q : ds.relevance_sets_[i]) {
      if (q < 0 || static_cast<std::size_t>(q) >= m) {
        throw ShapeError("relevance set names an unknown query");
      }
      ds.relevance_[i * m + static_cast<std::size_t>(q)] = 1;
      (ds.in_test_[i] ? ds.test_relevant_ : ds.train_relevant_)[q].push_back(
          id);
    }
  }
  return ds;
}

void Dataset::check_invariants(std::size_t k) const {
  for (std::size_t i = 0; i < num_items(); ++i) {
    if (relevance_sets_[i].empty()) {
      throw DatasetError("item " + std::to_string(i) +
                         " is not relevant to any query");
    }
  }
  if (train_.size() + test_.size() != num_items()) {
    throw DatasetError("train and test splits are not a partition");
  }
  for (ItemId id : train_) {
    if (in_test_[static_cast<std::size_t>(id)]) {
      throw DatasetError("item " + std::to_string(id) + " is in both splits");
    }
  }
  for (int q = 0; q < num_queries_; ++q) {
    for (Split s : {Split::kTrain, Split::kTest}) {
      const auto have = relevant_items(s, q).size();
      if (have < k) {
        throw DatasetError(
            "query " + std::to_string(q) + " has only " +
            std::to_string(have) + " relevant items in the " +
            (s == Split::kTrain ? "train" : "test") + " split, need k = " +
            std::to_string(k));
      }
    }
  }
}

Dataset generate_synthetic_dataset(const DatasetParams& params, std::size_t k,
                                   std::uint64_t seed) {
  const int m = params.num_queries;
  const int n = params.num_items;
  const int d = params.feature_dim;
  if (m < 2) throw ConfigError("need at least 2 standing queries");
  if (d < 1) throw ConfigError("feature dimension must be positive");
  if (k == 0) throw ConfigError("list size k must be positive");
  if (static_cast<std::size_t>(n) < 2 * k * static_cast<std::size_t>(m)) {
    throw ConfigError("need at least 2 * k * m = " +
                      std::to_string(2 * k * static_cast<std::size_t>(m)) +
                      " items, got " + std::to_string(n));
  }
  if (!(params.noise_scale >= 0.0) ||
      !(params.multi_relevance_prob >= 0.0 &&
        params.multi_relevance_prob <= 1.0) ||
      !(params.train_fraction > 0.0 && params.train_fraction < 1.0)) {
    throw ConfigError("invalid noise scale, multiplicity or train fraction");
  }

  Rng rng = make_rng({seed, kDatasetStream});
  const double max_cos =
      std::cos(params.min_prototype_angle_deg * 3.14159265358979323846 / 180.0);
  Matrix prototypes(d, m);
  for (int q = 0; q < m; ++q) {
    bool placed = false;
    for (int attempt = 0; attempt < 100000 && !placed; ++attempt) {
      Vector v(d);
      for (int i = 0; i < d; ++i) v(i) = standard_normal(rng);
      if (v.norm() == 0.0) continue;
      v.normalize();
      placed = true;
      for (int p = 0; p < q; ++p) {
        if (v.dot(prototypes.col(p)) > max_cos) {
          placed = false;
          break;
        }
      }
      if (placed) prototypes.col(q) = v;
    }
    if (!placed) {
      throw DatasetError("could not place prototype " + std::to_string(q) +
                         " at the required angle in " + std::to_string(d) +
                         " dimensions");
    }
  }

  Matrix features(d, n);
  std::vector<std::vector<int>> sets(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    auto& set = sets[static_cast<std::size_t>(i)];
    const int primary = static_cast<int>(uniform_index(rng, m));
    set.push_back(primary);
    if (uniform01(rng) < params.multi_relevance_prob) {
      int second = static_cast<int>(uniform_index(rng, m - 1));
      if (second >= primary) ++second;
      set.push_back(second);
    }
    Vector x = Vector::Zero(d);
    for (int q : set) x += prototypes.col(q);
    x /= static_cast<double>(set.size());
    for (int j = 0; j < d; ++j) x(j) += params.noise_scale * standard_normal(rng);
    features.col(i) = x;
  }

  // Stratified split by primary query.
  std::vector<std::vector<int>> by_query(static_cast<std::size_t>(m));
  for (int i = 0; i < n; ++i) {
    by_query[static_cast<std::size_t>(sets[static_cast<std::size_t>(i)][0])]
        .push_back(i);
  }
  std::vector<bool> in_test(static_cast<std::size_t>(n), false);
  for (auto& group : by_query) {
    for (std::size_t i = group.size(); i > 1; --i) {
      std::swap(group[i - 1], group[uniform_index(rng, i)]);
    }
    const auto train_count = static_cast<std::size_t>(
        std::llround(params.train_fraction * static_cast<double>(group.size())));
    for (std::size_t i = train_count; i < group.size(); ++i) {
      in_test[static_cast<std::size_t>(group[i])] = true;
    }
  }

  Dataset ds = Dataset::from_parts(std::move(features), std::move(prototypes),
                                   std::move(sets), std::move(in_test));
  ds.check_invariants(k);
  return ds;
}

Interaction sample_interaction(const Dataset& dataset, Split split,
                               std::size_t k, std::size_t c, Rng& rng) {
  const auto& items = dataset.split(split);
  if (k == 0 || k > c) throw ConfigError("need 1 <= k <= pool size");
  if (c > items.size()) {
    throw ConfigError("pool size " + std::to_string(c) + " exceeds the " +
                      std::to_string(items.size()) + " items in the split");
  }
  Interaction out;
  out.query = static_cast<int>(uniform_index(
      rng, static_cast<std::uint64_t>(dataset.num_queries())));

  // Floyd's algorithm: a uniform c-subset in c draws.
  const std::size_t total = items.size();
  std::vector<bool> taken(total, false);
  out.pool.reserve(c);
  for (std::size_t j = total - c; j < total; ++j) {
    std::size_t t = uniform_index(rng, j + 1);
    if (taken[t]) t = j;
    taken[t] = true;
    out.pool.push_back(items[t]);
  }

  out.relevance.resize(c);
  for (std::size_t i = 0; i < c; ++i) {
    out.relevance[i] = dataset.relevant(out.pool[i], out.query) ? 1 : 0;
    out.num_relevant += out.relevance[i];
  }
  if (out.num_relevant == 0) {
    const auto& relevant = dataset.relevant_items(split, out.query);
    if (relevant.empty()) {
      throw ContractError("query " + std::to_string(out.query) +
                          " has no relevant items in the split");
    }
    const std::size_t slot = uniform_index(rng, c);
    out.pool[slot] = relevant[uniform_index(rng, relevant.size())];
    out.relevance[slot] = 1;
    out.num_relevant = 1;
  }
  return out;
}

std::string to_string(FeedbackKind kind) {
  return kind == FeedbackKind::kNdcg ? "ndcg" : "clicks";
}

FeedbackKind parse_feedback_kind(const std::string& name) {
  if (name == "ndcg") return FeedbackKind::kNdcg;
  if (name == "clicks") return FeedbackKind::kClicks;
  throw ConfigError("unknown feedback '" + name + "' (expected ndcg or clicks)");
}

void ExperimentConfig::validate() const {
  if (k == 0) throw ConfigError("k must be positive");
  if (k > pool_size) {
    throw ConfigError("k = " + std::to_string(k) + " exceeds pool size " +
                      std::to_string(pool_size));
  }
  if (batch_size == 0) throw ConfigError("batch size must be at least 1");
  if (eval_batches == 0 || eval_batch_size == 0) {
    throw ConfigError("evaluation needs at least one batch of one query");
  }
  if (!(epsilon >= 0.0 && epsilon <= 1.0)) {
    throw ConfigError("epsilon must be in [0, 1]");
  }
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) {
    throw ConfigError("learning rate must be positive and finite");
  }
  for (int h : hidden_layers) {
    if (h <= 0) throw ConfigError("hidden layer sizes must be positive");
  }
  if (feedback == FeedbackKind::kClicks) resolve_click_config(*this);
}

nlohmann::json to_json(const ExperimentConfig& c) {
  return {{"learner", to_string(c.learner)},
          {"epsilon", c.epsilon},
          {"k", c.k},
          {"feedback", to_string(c.feedback)},
          {"click_config", c.click_config},
          {"click_config_file", c.click_config_file},
          {"pool_size", c.pool_size},
          {"batch_size", c.batch_size},
          {"num_batches", c.num_batches},
          {"seed", c.seed},
          {"dataset_seed", c.dataset_seed},
          {"dataset",
           {{"num_queries", c.dataset.num_queries},
            {"num_items", c.dataset.num_items},
            {"feature_dim", c.dataset.feature_dim},
            {"multi_relevance_prob", c.dataset.multi_relevance_prob},
            {"noise_scale", c.dataset.noise_scale},
            {"train_fraction", c.dataset.train_fraction},
            {"min_prototype_angle_deg", c.dataset.min_prototype_angle_deg}}},
          {"hidden_layers", c.hidden_layers},
          {"learning_rate", c.learning_rate},
          {"use_reward_baseline", c.use_reward_baseline},
          {"eval_batches", c.eval_batches},
          {"eval_batch_size", c.eval_batch_size}};
}

ExperimentConfig experiment_config_from_json(const nlohmann::json& j) {
  // Missing keys keep their defaults so partial config files work; unknown
  // keys are rejected to catch typos.
  static const std::set<std::string> kKeys = {
      "learner",       "epsilon",        "k",
      "feedback",      "click_config",   "click_config_file",
      "pool_size",     "batch_size",     "num_batches",
      "seed",          "dataset_seed",   "dataset",
      "hidden_layers", "learning_rate",  "use_reward_baseline",
      "eval_batches",  "eval_batch_size"};
  static const std::set<std::string> kDatasetKeys = {
      "num_queries",    "num_items",      "feature_dim",
      "multi_relevance_prob", "noise_scale", "train_fraction",
      "min_prototype_angle_deg"};
  if (!j.is_object()) throw ConfigError("experiment config must be an object");
  for (const auto& [key, value] : j.items()) {
    if (!kKeys.contains(key)) throw ConfigError("unknown config key: " + key);
  }
  ExperimentConfig c;
  try {
    if (j.contains("learner")) {
      c.learner = parse_learner_kind(j["learner"].get<std::string>());
    }
    if (j.contains("feedback")) {
      c.feedback = parse_feedback_kind(j["feedback"].get<std::string>());
    }
    c.epsilon = j.value("epsilon", c.epsilon);
    c.k = j.value("k", c.k);
    c.click_config = j.value("click_config", c.click_config);
    c.click_config_file = j.value("click_config_file", c.click_config_file);
    c.pool_size = j.value("pool_size", c.pool_size);
    c.batch_size = j.value("batch_size", c.batch_size);
    c.num_batches = j.value("num_batches", c.num_batches);
    c.seed = j.value("seed", c.seed);
    c.dataset_seed = j.value("dataset_seed", c.dataset_seed);
    if (j.contains("dataset")) {
      const auto& d = j["dataset"];
      if (!d.is_object()) throw ConfigError("dataset must be an object");
      for (const auto& [key, value] : d.items()) {
        if (!kDatasetKeys.contains(key)) {
          throw ConfigError("unknown dataset key: " + key);
        }
      }
      auto& p = c.dataset;
      p.num_queries = d.value("num_queries", p.num_queries);
      p.num_items = d.value("num_items", p.num_items);
      p.feature_dim = d.value("feature_dim", p.feature_dim);
      p.multi_relevance_prob =
          d.value("multi_relevance_prob", p.multi_relevance_prob);
      p.noise_scale = d.value("noise_scale", p.noise_scale);
      p.train_fraction = d.value("train_fraction", p.train_fraction);
      p.min_prototype_angle_deg =
          d.value("min_prototype_angle_deg", p.min_prototype_angle_deg);
    }
    c.hidden_layers = j.value("hidden_layers", c.hidden_layers);
    c.learning_rate = j.value("learning_rate", c.learning_rate);
    c.use_reward_baseline = j.value("use_reward_baseline", c.use_reward_baseline);
    c.eval_batches = j.value("eval_batches", c.eval_batches);
    c.eval_batch_size = j.value("eval_batch_size", c.eval_batch_size);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("bad experiment config: ") + e.what());
  }
  return c;
}

ClickConfig resolve_click_config(const ExperimentConfig& config) {
  const ClickConfigSet set = config.click_config_file.empty()
                                 ? ClickConfigSet::defaults()
                                 : ClickConfigSet::load(config.click_config_file);
  return set.get(config.click_config, config.k);
}

std::vector<double> ground_truth_weights(const ExperimentConfig& config) {
  if (config.feedback == FeedbackKind::kNdcg) return ndcg_discounts(config.k);
  return resolve_click_config(config).examination;
}

Dataset make_dataset(const ExperimentConfig& config) {
  return generate_synthetic_dataset(config.dataset, config.k,
                                    config.dataset_seed);
}

Learner make_learner(const ExperimentConfig& config, const Dataset& dataset) {
  std::vector<int> sizes = {dataset.feature_dim()};
  sizes.insert(sizes.end(), config.hidden_layers.begin(),
               config.hidden_layers.end());
  sizes.push_back(dataset.num_queries());
  LearnerConfig lc;
  lc.kind = config.learner;
  lc.epsilon = config.epsilon;
  lc.k = config.k;
  lc.use_reward_baseline = config.use_reward_baseline;
  lc.learning_rate = config.learning_rate;
  if (config.learner == LearnerKind::kOracleLearn) {
    lc.oracle_weights = ground_truth_weights(config);
  }
  return Learner(lc, init_model(sizes, derive_seed({config.seed, kModelStream})));
}

void MetricsLog::write_csv(std::ostream& out) const {
  out << "batch,mean_ndcg,running_ndcg,loss";
  for (std::size_t i = 1; i <= k; ++i) out << ",w_" << i;
  out << "\r\n";
  for (const auto& row : rows) {
    out << row.batch << ',' << format_double(row.mean_ndcg) << ','
        << format_double(row.running_ndcg) << ',' << format_double(row.loss);
    for (std::size_t i = 0; i < k; ++i) {
      out << ',';
      if (i < row.weights.size()) out << format_double(row.weights[i]);
    }
    out << "\r\n";
  }
}

namespace {

void list_relevances(const Dataset& dataset, int query,
                     const RankedList& list, std::vector<std::uint8_t>& out) {
  out.resize(list.size());
  for (std::size_t i = 0; i < list.size(); ++i) {
    out[i] = dataset.relevant(list.items[i], query) ? 1 : 0;
  }
}

}  // namespace

OnlineResult run_online(const ExperimentConfig& config, const Dataset& dataset,
                        Learner learner) {
  config.validate();
  std::optional<ClickConfig> clicks;
  if (config.feedback == FeedbackKind::kClicks) {
    clicks = resolve_click_config(config);
  }
  OnlineResult result{MetricsLog{config.k, {}}, std::move(learner), 0, 0, {}};
  Learner& current = result.learner;

  const std::size_t c = config.pool_size;
  const std::size_t bs = config.batch_size;
  const auto d = static_cast<Eigen::Index>(dataset.feature_dim());
  std::vector<InteractionRecord> records(bs);
  std::vector<Rng> rngs;
  std::vector<Interaction> interactions(bs);
  std::vector<std::uint8_t> rels;
  double ndcg_sum = 0.0;

  for (std::size_t b = 0; b < config.num_batches; ++b) {
    Matrix inputs(d, static_cast<Eigen::Index>(bs * c));
    rngs.clear();
    for (std::size_t s = 0; s < bs; ++s) {
      rngs.push_back(make_rng({config.seed, kTrainStream, b, s}));
      interactions[s] =
          sample_interaction(dataset, Split::kTrain, config.k, c, rngs[s]);
      for (std::size_t j = 0; j < c; ++j) {
        inputs.col(static_cast<Eigen::Index>(s * c + j)) =
            dataset.features().col(interactions[s].pool[j]);
      }
    }
    const Matrix scores = forward_batch(current.model(), inputs);

    MetricsRow row;
    row.batch = b + 1;
    double batch_ndcg = 0.0;
    for (std::size_t s = 0; s < bs; ++s) {
      const Interaction& inter = interactions[s];
      InteractionRecord& rec = records[s];
      rec.query = inter.query;
      rec.pool.item_ids = inter.pool;
      rec.pool.scores.resize(c);
      for (std::size_t j = 0; j < c; ++j) {
        rec.pool.scores[j] =
            scores(inter.query, static_cast<Eigen::Index>(s * c + j));
      }
      rec.features =
          inputs.middleCols(static_cast<Eigen::Index>(s * c),
                            static_cast<Eigen::Index>(c));
      auto generated = generate_results(rec.pool, config.k, config.epsilon,
                                        config.learner, rngs[s]);
      rec.list = std::move(generated.list);
      rec.explored = generated.explored;
      list_relevances(dataset, inter.query, rec.list, rels);
      const double ndcg = ndcg_at_k(rels, inter.num_relevant, config.k);
      rec.reward = clicks ? ctr_feedback(simulate_clicks_pbm(rels, *clicks,
                                                             rngs[s]))
                          : ndcg;
      batch_ndcg += ndcg;
      row.explored += rec.explored ? 1 : 0;
    }

    try {
      row.loss = current.update(records);
    } catch (const Error& e) {
      result.error = "batch " + std::to_string(b + 1) + ": " + e.what();
      break;
    }
    ndcg_sum += batch_ndcg;
    result.interactions += bs;
    result.explored += row.explored;
    row.mean_ndcg = batch_ndcg / static_cast<double>(bs);
    row.running_ndcg = ndcg_sum / static_cast<double>(result.interactions);
    const auto& w = current.weights().w;
    row.weights.assign(w.data(), w.data() + w.size());
    result.log.rows.push_back(std::move(row));
  }
  return result;
}

OnlineResult run_online(const ExperimentConfig& config,
                        const Dataset& dataset) {
  return run_online(config, dataset, make_learner(config, dataset));
}

BatchScorer model_scorer(const ScoringModel& model, const Dataset& dataset) {
  return [&model, &dataset](std::span<const Interaction> batch) {
    Eigen::Index total = 0;
    for (const auto& inter : batch) {
      total += static_cast<Eigen::Index>(inter.pool.size());
    }
    Matrix inputs(dataset.feature_dim(), total);
    Eigen::Index col = 0;
    for (const auto& inter : batch) {
      for (ItemId id : inter.pool) {
        inputs.col(col++) = dataset.features().col(id);
      }
    }
    const Matrix scores = forward_batch(model, inputs);
    std::vector<std::vector<double>> out(batch.size());
    col = 0;
    for (std::size_t s = 0; s < batch.size(); ++s) {
      out[s].resize(batch[s].pool.size());
      for (double& v : out[s]) v = scores(batch[s].query, col++);
    }
    return out;
  };
}

namespace {

// Draws the evaluation pools; `rank` turns (interaction, slot rng) into nDCG.
template <typename RankFn>
OfflineResult evaluate_pools(const Dataset& dataset,
                             const ExperimentConfig& config, RankFn&& rank) {
  OfflineResult result;
  std::vector<Interaction> batch(config.eval_batch_size);
  std::vector<Rng> rngs;
  double total = 0.0;
  for (std::size_t b = 0; b < config.eval_batches; ++b) {
    rngs.clear();
    for (std::size_t s = 0; s < batch.size(); ++s) {
      rngs.push_back(make_rng({config.seed, kEvalStream, b, s}));
      batch[s] = sample_interaction(dataset, Split::kTest, config.k,
                                    config.pool_size, rngs[s]);
      for (ItemId id : batch[s].pool) {
        if (!dataset.in_split(id, Split::kTest)) {
          throw ContractError("evaluation pool contains training item " +
                              std::to_string(id));
        }
      }
    }
    const double sum = rank(std::span<const Interaction>(batch), rngs);
    result.batch_means.push_back(sum / static_cast<double>(batch.size()));
    total += sum;
  }
  result.mean = total / static_cast<double>(config.eval_batches *
                                            config.eval_batch_size);
  return result;
}

}  // namespace

OfflineResult evaluate_offline(const BatchScorer& scorer,
                               const Dataset& dataset,
                               const ExperimentConfig& config) {
  std::vector<std::uint8_t> rels;
  return evaluate_pools(
      dataset, config,
      [&](std::span<const Interaction> batch, std::vector<Rng>&) {
        const auto scores = scorer(batch);
        double sum = 0.0;
        for (std::size_t s = 0; s < batch.size(); ++s) {
          ScoredPool pool{batch[s].pool, scores[s]};
          const RankedList list = greedy_top_k(pool, config.k);
          list_relevances(dataset, batch[s].query, list, rels);
          sum += ndcg_at_k(rels, batch[s].num_relevant, config.k);
        }
        return sum;
      });
}

OfflineResult evaluate_offline(const ScoringModel& model,
                               const Dataset& dataset,
                               const ExperimentConfig& config) {
  return evaluate_offline(model_scorer(model, dataset), dataset, config);
}

OfflineResult evaluate_random(const Dataset& dataset,
                              const ExperimentConfig& config) {
  std::vector<std::uint8_t> rels;
  return evaluate_pools(
      dataset, config,
      [&](std::span<const Interaction> batch, std::vector<Rng>& rngs) {
        double sum = 0.0;
        for (std::size_t s = 0; s < batch.size(); ++s) {
          ScoredPool pool{batch[s].pool,
                          std::vector<double>(batch[s].pool.size(), 0.0)};
          const RankedList list = random_top_k(pool, config.k, rngs[s]);
          list_relevances(dataset, batch[s].query, list, rels);
          sum += ndcg_at_k(rels, batch[s].num_relevant, config.k);
        }
        return sum;
      });
}

double random_baseline_ndcg(const Dataset& dataset, Split split, std::size_t k,
                            std::size_t c, std::size_t draws,
                            std::uint64_t seed) {
  if (draws == 0) throw ConfigError("need at least one draw");
  std::vector<std::uint8_t> rels;
  double sum = 0.0;
  for (std::size_t i = 0; i < draws; ++i) {
    Rng rng = make_rng({seed, kBaselineStream, i});
    const Interaction inter = sample_interaction(dataset, split, k, c, rng);
    ScoredPool pool{inter.pool, std::vector<double>(c, 0.0)};
    const RankedList list = random_top_k(pool, k, rng);
    list_relevances(dataset, inter.query, list, rels);
    sum += ndcg_at_k(rels, inter.num_relevant, k);
  }
  return sum / static_cast<double>(draws);
}

double mean_of(std::span<const double> values) {
  if (values.empty()) return 0.0;
  return std::accumulate(values.begin(), values.end(), 0.0) /
         static_cast<double>(values.size());
}

double stddev_of(std::span<const double> values) {
  if (values.size() < 2) return 0.0;
  const double mu = mean_of(values);
  double ss = 0.0;
  for (double v : values) ss += (v - mu) * (v - mu);
  return std::sqrt(ss / static_cast<double>(values.size() - 1));
}

double t_test_two_tailed(std::span<const double> a, std::span<const double> b,
                         TTestVariant variant) {
  if (a.size() < 2 || b.size() < 2) {
    throw ContractError("t-test needs at least two values per sample");
  }
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  const double va = std::pow(stddev_of(a), 2);
  const double vb = std::pow(stddev_of(b), 2);
  if (va == 0.0 && vb == 0.0) {
    throw ContractError("t-test is undefined when both samples are constant");
  }
  double se2;
  double df;
  if (variant == TTestVariant::kWelch) {
    se2 = va / na + vb / nb;
    df = se2 * se2 / ((va / na) * (va / na) / (na - 1.0) +
                      (vb / nb) * (vb / nb) / (nb - 1.0));
  } else {
    const double pooled =
        ((na - 1.0) * va + (nb - 1.0) * vb) / (na + nb - 2.0);
    se2 = pooled * (1.0 / na + 1.0 / nb);
    df = na + nb - 2.0;
  }
  const double t = (mean_of(a) - mean_of(b)) / std::sqrt(se2);
  if (t == 0.0) return 1.0;
  const boost::math::students_t dist(df);
  const double p = 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(t)));
  return std::clamp(p, 0.0, 1.0);
}

WeightComparison weight_distance(std::span<const double> learned,
                                 std::span<const double> ground_truth) {
  if (learned.size() != ground_truth.size()) {
    throw ShapeError("weight vectors differ in length");
  }
  WeightComparison out;
  double ss = 0.0;
  for (std::size_t i = 0; i < learned.size(); ++i) {
    ss += (learned[i] - ground_truth[i]) * (learned[i] - ground_truth[i]);
  }
  out.distance = std::sqrt(ss);
  out.strictly_decreasing = true;
  for (std::size_t i = 1; i < learned.size(); ++i) {
    if (!(learned[i] < learned[i - 1])) out.strictly_decreasing = false;
  }
  auto descending = [](std::span<const double> v) {
    std::vector<std::size_t> order(v.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return v[a] > v[b]; });
    return order;
  };
  out.order_matches = descending(learned) == descending(ground_truth);
  return out;
}

}  // namespace oltr
