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

#include <cmath>
#include <filesystem>
#include <map>

#include "doctest.h"
#include "oltr/errors.h"
#include "oltr/feedback.h"
#include "test_util.h"

namespace oltr {
namespace {

ScoredPool make_pool(std::vector<double> scores) {
  ScoredPool pool;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    pool.item_ids.push_back(static_cast<ItemId>(i));
  }
  pool.scores = std::move(scores);
  return pool;
}

// Random record whose pool scores come from `model`.
InteractionRecord random_record(const ScoringModel& model, std::size_t c,
                                std::size_t k, Rng& rng) {
  InteractionRecord r;
  r.query = static_cast<int>(uniform_index(rng, model.num_outputs()));
  r.features = Matrix(model.input_dim(), static_cast<Eigen::Index>(c));
  for (Eigen::Index j = 0; j < r.features.cols(); ++j) {
    for (Eigen::Index i = 0; i < r.features.rows(); ++i) {
      r.features(i, j) = standard_normal(rng);
    }
  }
  const Matrix scores = forward_batch(model, r.features);
  for (std::size_t j = 0; j < c; ++j) {
    r.pool.item_ids.push_back(static_cast<ItemId>(100 + 3 * j));
    r.pool.scores.push_back(scores(r.query, static_cast<Eigen::Index>(j)));
  }
  r.list = pl_sample(r.pool, k, rng);
  r.reward = uniform01(rng);
  return r;
}

TEST_CASE("learner names round-trip") {
  for (auto kind : {LearnerKind::kPGLearn, LearnerKind::kRegLearn,
                    LearnerKind::kOracleLearn}) {
    CHECK(parse_learner_kind(to_string(kind)) == kind);
  }
  CHECK(parse_learner_kind("RegLearn") == LearnerKind::kRegLearn);
  CHECK_THROWS_AS(parse_learner_kind("dbgd"), ConfigError);
}

TEST_CASE("generate_results exploits by descending score") {
  Rng rng(1);
  const auto pool = make_pool({3.0, 1.0, 2.0});
  const auto out = generate_results(pool, 2, 0.0, LearnerKind::kRegLearn, rng);
  CHECK(out.list.items == std::vector<ItemId>{0, 2});
  CHECK_FALSE(out.explored);
}

TEST_CASE("generate_results rejects k larger than the pool") {
  Rng rng(1);
  const auto pool = make_pool({3.0, 1.0});
  CHECK_THROWS_AS(generate_results(pool, 3, 0.1, LearnerKind::kRegLearn, rng),
                  ConfigError);
  CHECK_THROWS_AS(generate_results(pool, 1, 1.5, LearnerKind::kRegLearn, rng),
                  ConfigError);
}

TEST_CASE("ties are broken by ascending item id") {
  Rng rng(1);
  ScoredPool pool{{9, 4, 7, 1}, {0.5, 0.5, 0.5, 0.5}};
  for (auto kind : {LearnerKind::kRegLearn, LearnerKind::kOracleLearn}) {
    const auto out = generate_results(pool, 3, 0.0, kind, rng);
    CHECK(out.list.items == std::vector<ItemId>{1, 4, 7});
  }
}

TEST_CASE("epsilon = 1 gives uniformly random ordered pairs") {
  const auto pool = make_pool({5.0, 1.0, -2.0, 0.3});
  for (auto kind : {LearnerKind::kPGLearn, LearnerKind::kRegLearn,
                    LearnerKind::kOracleLearn}) {
    Rng rng(42);
    std::map<std::vector<ItemId>, int> counts;
    for (int i = 0; i < 100000; ++i) {
      const auto out = generate_results(pool, 2, 1.0, kind, rng);
      CHECK(out.explored);
      ++counts[out.list.items];
    }
    CHECK(counts.size() == 12);
    for (const auto& [list, n] : counts) {
      CHECK(std::abs(n / 1e5 - 1.0 / 12.0) < 0.01);
    }
  }
}

TEST_CASE("PGLearn exploitation samples from Plackett-Luce") {
  const auto pool = make_pool({0.7, -0.4, 1.3});
  Rng rng(5);
  std::map<std::vector<ItemId>, int> counts;
  for (int i = 0; i < 100000; ++i) {
    ++counts[generate_results(pool, 3, 0.0, LearnerKind::kPGLearn, rng).list.items];
  }
  double tv = 0.0;
  for (const auto& e : enumerate_lists(pool, 3)) {
    tv += std::abs(counts[e.list.items] / 1e5 - e.probability);
  }
  CHECK(0.5 * tv < 0.02);
}

TEST_CASE("explored fraction matches epsilon") {
  const auto pool = make_pool({0.1, 0.2, 0.3, 0.4, 0.5, 0.6});
  for (double eps : {0.1, 0.5}) {
    Rng rng(6);
    int explored = 0;
    for (int i = 0; i < 100000; ++i) {
      explored +=
          generate_results(pool, 3, eps, LearnerKind::kRegLearn, rng).explored;
    }
    CHECK(std::abs(explored / 1e5 - eps) < 0.005);
  }
}

TEST_CASE("exploitation is invariant to a constant score shift") {
  Rng src(7);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> s(8);
    for (double& v : s) v = standard_normal(src);
    const auto pool = make_pool(s);
    ScoredPool shifted = pool;
    for (double& v : shifted.scores) v += 2.5;
    for (auto kind : {LearnerKind::kPGLearn, LearnerKind::kRegLearn,
                      LearnerKind::kOracleLearn}) {
      Rng a(trial), b(trial);
      CHECK(generate_results(pool, 4, 0.0, kind, a).list ==
            generate_results(shifted, 4, 0.0, kind, b).list);
    }
  }
}

TEST_CASE("pg_update with zero rewards leaves the model unchanged") {
  ScoringModel model = init_model({4, 8, 3}, 1);
  auto adam = AdamState::for_size(model.num_parameters());
  Rng rng(2);
  std::vector<InteractionRecord> batch;
  for (int i = 0; i < 5; ++i) {
    batch.push_back(random_record(model, 6, 3, rng));
    batch.back().reward = 0.0;
  }
  const Vector before = model.parameters();
  pg_update(model, adam, batch);
  CHECK(model.parameters() == before);
  CHECK(adam.step_count == 1);
}

TEST_CASE("pg score gradient for two equal scores and reward 1") {
  // The score-level factor chained into the scorer is reward * grad log PL.
  const auto pool = make_pool({0.0, 0.0});
  const auto g = pl_log_prob_grad(pool, {{0, 1}});
  CHECK(1.0 * g[0] == doctest::Approx(0.5));
  CHECK(1.0 * g[1] == doctest::Approx(-0.5));

  // Chained through a linear scorer with one-hot features: the minimizing
  // gradient on the query-0 bias is -(0.5 - 0.5) = 0 and on the weights it
  // is -(+0.5, -0.5).
  ScoringModel model({2, 1});
  InteractionRecord r;
  r.query = 0;
  r.pool = pool;
  r.features = Matrix::Identity(2, 2);
  r.list = {{0, 1}};
  r.reward = 1.0;
  const Vector grad = pg_gradient(model, std::vector<InteractionRecord>{r});
  CHECK(grad(0) == doctest::Approx(-0.5));
  CHECK(grad(1) == doctest::Approx(0.5));
  CHECK(grad(2) == doctest::Approx(0.0));
}

TEST_CASE("pg gradient scales linearly with the rewards") {
  const ScoringModel model = init_model({5, 8, 8, 4}, 3);
  Rng rng(4);
  std::vector<InteractionRecord> batch;
  for (int i = 0; i < 6; ++i) batch.push_back(random_record(model, 7, 4, rng));
  const Vector g1 = pg_gradient(model, batch);
  for (auto& r : batch) r.reward *= 2.0;
  const Vector g2 = pg_gradient(model, batch);
  CHECK(g2 == 2.0 * g1);
}

TEST_CASE("pg gradient matches finite differences of the surrogate") {
  const ScoringModel model = init_model({3, 6, 2}, 8);
  Rng rng(9);
  std::vector<InteractionRecord> batch;
  for (int i = 0; i < 4; ++i) batch.push_back(random_record(model, 5, 3, rng));
  auto surrogate = [&](const Vector& params) {
    ScoringModel probe = model;
    probe.parameters() = params;
    double total = 0.0;
    for (const auto& r : batch) {
      ScoredPool pool = r.pool;
      const Matrix s = forward_batch(probe, r.features);
      for (std::size_t j = 0; j < pool.size(); ++j) {
        pool.scores[j] = s(r.query, static_cast<Eigen::Index>(j));
      }
      total -= r.reward * pl_log_probability(pool, r.list);
    }
    return total / static_cast<double>(batch.size());
  };
  const Vector numeric =
      testing::central_differences(surrogate, model.parameters(), 1e-5);
  CHECK(testing::max_relative_error(pg_gradient(model, batch), numeric) < 1e-4);
}

TEST_CASE("reward baseline removes the batch-mean reward") {
  const ScoringModel model = init_model({3, 5, 2}, 2);
  Rng rng(1);
  std::vector<InteractionRecord> batch;
  for (int i = 0; i < 4; ++i) {
    batch.push_back(random_record(model, 4, 2, rng));
    batch.back().reward = 0.75;
  }
  CHECK(pg_gradient(model, batch, true).isZero(0.0));
  CHECK_FALSE(pg_gradient(model, batch, false).isZero(0.0));
}

TEST_CASE("PGLearn solves a two-armed bandit") {
  // One query, two items with one-hot features, k = 1, reward = relevance
  // of the shown item (item 0 is relevant).
  ScoringModel model({2, 1});
  auto adam = AdamState::for_size(model.num_parameters(), 1e-3);
  Rng rng(10);
  const ScoredPool base{{0, 1}, {0.0, 0.0}};
  for (int step = 0; step < 2000; ++step) {
    std::vector<InteractionRecord> batch;
    const Matrix scores = forward_batch(model, Matrix::Identity(2, 2));
    for (int i = 0; i < 10; ++i) {
      InteractionRecord r;
      r.query = 0;
      r.pool = base;
      r.pool.scores = {scores(0, 0), scores(0, 1)};
      r.features = Matrix::Identity(2, 2);
      r.list = generate_results(r.pool, 1, 0.0, LearnerKind::kPGLearn, rng).list;
      r.reward = r.list.items[0] == 0 ? 1.0 : 0.0;
      batch.push_back(std::move(r));
    }
    pg_update(model, adam, batch);
  }
  Vector e0(2), e1(2);
  e0 << 1, 0;
  e1 << 0, 1;
  CHECK(score(model, e0, 0) > score(model, e1, 0));
}

TEST_CASE("reg_predict examples") {
  DiscountWeights w{Vector(2), true};
  w.w << 1.0, 0.6309;
  CHECK(reg_predict(w, std::vector<double>{1.0, 1.0}) ==
        doctest::Approx(1.6309));
  CHECK(reg_predict(w, std::vector<double>{0.0, 0.0}) == 0.0);
  CHECK_THROWS_AS(reg_predict(w, std::vector<double>{1.0}), ShapeError);

  const auto d = ndcg_discounts(5);
  DiscountWeights nd{Eigen::Map<const Vector>(d.data(), 5), false};
  CHECK(reg_predict(nd, std::vector<double>{1, 0, 1, 0, 0}) ==
        doctest::Approx(1.5));
}

TEST_CASE("reg_loss_gradient matches finite differences") {
  Rng rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    const Eigen::Index k = 1 + trial % 5;
    Vector w(k), s(k);
    for (Eigen::Index i = 0; i < k; ++i) {
      w(i) = standard_normal(rng);
      s(i) = standard_normal(rng);
    }
    const double r = standard_normal(rng);
    const auto g = reg_loss_gradient(w, s, r);
    auto loss_w = [&](const Vector& x) {
      const double e = r - x.dot(s);
      return 0.5 * e * e;
    };
    auto loss_s = [&](const Vector& x) {
      const double e = r - w.dot(x);
      return 0.5 * e * e;
    };
    CHECK(testing::max_relative_error(
              g.weight_grad, testing::central_differences(loss_w, w, 1e-5),
              1e-3) < 1e-8);
    CHECK(testing::max_relative_error(
              g.score_grad, testing::central_differences(loss_s, s, 1e-5),
              1e-3) < 1e-8);
    CHECK(g.loss == doctest::Approx(loss_w(w)));
  }
}

TEST_CASE("reg_gradients theta part matches finite differences") {
  const ScoringModel model = init_model({4, 7, 3}, 12);
  Rng rng(13);
  std::vector<InteractionRecord> batch;
  for (int i = 0; i < 5; ++i) batch.push_back(random_record(model, 6, 3, rng));
  DiscountWeights w{Vector(3), true};
  w.w << 0.9, 0.5, 0.2;
  auto loss = [&](const Vector& params) {
    ScoringModel probe = model;
    probe.parameters() = params;
    return reg_gradients(probe, w, batch).loss;
  };
  const auto g = reg_gradients(model, w, batch);
  CHECK(testing::max_relative_error(
            g.theta,
            testing::central_differences(loss, model.parameters(), 1e-5)) <
        1e-4);
}

TEST_CASE("reg_update with zero residual changes nothing") {
  // Linear scorer, one-hot features: scores equal the weights' entries.
  ScoringModel model({3, 1});
  model.weight(0) << 0.2, 0.7, -0.1;
  DiscountWeights w{Vector(2), true};
  w.w << 1.0, 0.5;
  InteractionRecord r;
  r.query = 0;
  r.features = Matrix::Identity(3, 3);
  r.pool = {{0, 1, 2}, {0.2, 0.7, -0.1}};
  r.list = {{1, 0}};
  r.reward = 1.0 * 0.7 + 0.5 * 0.2;
  auto adam = AdamState::for_size(model.num_parameters());
  auto wadam = AdamState::for_size(2);
  const Vector params = model.parameters();
  const Vector before_w = w.w;
  const double loss =
      reg_update(model, w, adam, wadam, std::vector<InteractionRecord>{r});
  CHECK(loss == doctest::Approx(0.0).epsilon(1e-30));
  CHECK(model.parameters() == params);
  CHECK(w.w == before_w);

  DiscountWeights frozen{w.w, false};
  CHECK(oracle_update(model, frozen, adam,
                      std::vector<InteractionRecord>{r}) ==
        doctest::Approx(0.0));
  CHECK(model.parameters() == params);
}

TEST_CASE("reg_update and oracle_update reject the wrong weight mode") {
  ScoringModel model({3, 1});
  auto adam = AdamState::for_size(model.num_parameters());
  auto wadam = AdamState::for_size(2);
  DiscountWeights frozen{Vector::Ones(2), false};
  DiscountWeights trainable{Vector::Ones(2), true};
  InteractionRecord r;
  r.features = Matrix::Identity(3, 3);
  r.pool = {{0, 1, 2}, {0, 0, 0}};
  r.list = {{1, 0}};
  std::vector<InteractionRecord> batch{r};
  CHECK_THROWS_AS(reg_update(model, frozen, adam, wadam, batch), ConfigError);
  CHECK_THROWS_AS(oracle_update(model, trainable, adam, batch), ConfigError);
}

TEST_CASE("reg_update rejects non-finite rewards without changing state") {
  ScoringModel model = init_model({3, 4, 2}, 1);
  Rng rng(3);
  std::vector<InteractionRecord> batch{random_record(model, 4, 2, rng)};
  batch[0].reward = std::numeric_limits<double>::infinity();
  DiscountWeights w{Vector::Ones(2), true};
  auto adam = AdamState::for_size(model.num_parameters());
  auto wadam = AdamState::for_size(2);
  const Vector params = model.parameters();
  CHECK_THROWS_AS(reg_update(model, w, adam, wadam, batch), NumericError);
  CHECK(model.parameters() == params);
  CHECK(adam.step_count == 0);
  CHECK(wadam.step_count == 0);
}

TEST_CASE("oracle theta gradient equals the RegLearn theta gradient") {
  const ScoringModel model = init_model({4, 6, 3}, 14);
  Rng rng(15);
  std::vector<InteractionRecord> batch;
  for (int i = 0; i < 5; ++i) batch.push_back(random_record(model, 6, 3, rng));
  const auto d = ndcg_discounts(3);
  DiscountWeights trainable{Eigen::Map<const Vector>(d.data(), 3), true};
  DiscountWeights frozen{trainable.w, false};

  ScoringModel reg_model = model, oracle_model = model;
  auto reg_adam = AdamState::for_size(model.num_parameters());
  auto oracle_adam = reg_adam;
  auto wadam = AdamState::for_size(3);
  reg_update(reg_model, trainable, reg_adam, wadam, batch);
  oracle_update(oracle_model, frozen, oracle_adam, batch);
  CHECK(reg_model.parameters() == oracle_model.parameters());
  CHECK(frozen.w == Eigen::Map<const Vector>(d.data(), 3));
  CHECK(trainable.w != frozen.w);
}

// Noiseless linear rewards on a frozen relevance-emitting scorer.
struct RecoveryRun {
  Vector learned;
  std::size_t batches;
};

RecoveryRun recover_weights(const std::vector<double>& truth,
                            std::size_t max_batches, double lr) {
  const auto k = static_cast<Eigen::Index>(truth.size());
  const std::size_t c = 10;
  // Features are the relevance bit itself; f(x; 0) = x.
  ScoringModel model({1, 1});
  model.weight(0)(0, 0) = 1.0;
  DiscountWeights w{Vector::Ones(k), true};
  auto adam = AdamState::for_size(model.num_parameters(), lr);
  auto wadam = AdamState::for_size(k, lr);
  Rng rng(2718);
  std::size_t b = 0;
  for (; b < max_batches; ++b) {
    std::vector<InteractionRecord> batch(100);
    for (auto& r : batch) {
      r.features = Matrix(1, static_cast<Eigen::Index>(c));
      for (std::size_t j = 0; j < c; ++j) {
        r.pool.item_ids.push_back(static_cast<ItemId>(j));
        const double rel = uniform01(rng) < 0.4 ? 1.0 : 0.0;
        r.features(0, static_cast<Eigen::Index>(j)) = rel;
        r.pool.scores.push_back(rel);
      }
      r.list = random_top_k(r.pool, truth.size(), rng);
      r.reward = 0.0;
      for (Eigen::Index i = 0; i < k; ++i) {
        r.reward += truth[i] * r.features(0, r.list.items[i]);
      }
    }
    reg_update(model, w, adam, wadam, batch, /*update_scorer=*/false);
    if ((w.w - Eigen::Map<const Vector>(truth.data(), k))
            .lpNorm<Eigen::Infinity>() < 1e-3) {
      break;
    }
  }
  CHECK(model.weight(0)(0, 0) == 1.0);
  return {w.w, b};
}

TEST_CASE("RegLearn recovers position weights from noiseless rewards") {
  const std::vector<double> truth = {0.999, 0.959, 0.761, 0.592, 0.457};
  const auto run = recover_weights(truth, 10000, 1e-3);
  for (Eigen::Index i = 0; i < 5; ++i) {
    CHECK(std::abs(run.learned(i) - truth[i]) < 0.01);
  }
}

TEST_CASE("reg_update lowers the training loss on a noiseless linear task") {
  // Pure-linear scorer and targets generated by a fixed linear teacher.
  Rng rng(21);
  ScoringModel teacher = init_model({6, 2}, 99);
  ScoringModel model = init_model({6, 2}, 5);
  const std::vector<double> truth = {1.0, 0.6, 0.3};
  Learner learner(LearnerConfig{LearnerKind::kRegLearn, 0.1, 3, {}, false, 1e-3},
                  model);
  std::vector<double> losses;
  for (int b = 0; b < 1500; ++b) {
    std::vector<InteractionRecord> batch;
    for (int i = 0; i < 20; ++i) {
      InteractionRecord r = random_record(learner.model(), 8, 3, rng);
      const Matrix t = forward_batch(teacher, r.features);
      const auto pos = list_positions(r.pool, r.list);
      r.reward = 0.0;
      for (std::size_t i2 = 0; i2 < 3; ++i2) {
        r.reward += truth[i2] * t(r.query, static_cast<Eigen::Index>(pos[i2]));
      }
      batch.push_back(std::move(r));
    }
    losses.push_back(learner.update(batch));
  }
  // Non-increasing 100-batch moving average, sampled every 100 batches.
  double previous = std::numeric_limits<double>::infinity();
  for (std::size_t start = 0; start + 100 <= losses.size(); start += 100) {
    double avg = 0.0;
    for (std::size_t i = start; i < start + 100; ++i) avg += losses[i] / 100;
    CHECK(avg <= previous);
    previous = avg;
  }
}

TEST_CASE("learner config validation") {
  LearnerConfig c;
  c.kind = LearnerKind::kOracleLearn;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c.oracle_weights = std::vector<double>{1.0, 0.5};
  CHECK_THROWS_AS(c.validate(), ConfigError);  // k = 5
  c.k = 2;
  CHECK_NOTHROW(c.validate());
  c.kind = LearnerKind::kRegLearn;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c.oracle_weights.reset();
  c.epsilon = -0.1;
  CHECK_THROWS_AS(c.validate(), ConfigError);
}

TEST_CASE("learner initial weights") {
  const ScoringModel model = init_model({3, 4, 2}, 1);
  Learner reg({LearnerKind::kRegLearn, 0.1, 4, {}, false, 1e-4}, model);
  CHECK(reg.weights().w == Vector::Ones(4));
  CHECK(reg.weights().trainable);
  Learner oracle({LearnerKind::kOracleLearn, 0.1, 2, std::vector<double>{1.0, 0.25},
                  false, 1e-4},
                 model);
  CHECK(oracle.weights().w(1) == 0.25);
  CHECK_FALSE(oracle.weights().trainable);
  Learner pg({LearnerKind::kPGLearn, 0.1, 2, {}, false, 1e-4}, model);
  CHECK(pg.weights().size() == 0);
}

TEST_CASE("learner checkpoint round-trips") {
  ScoringModel model = init_model({3, 4, 2}, 1);
  Learner learner({LearnerKind::kRegLearn, 0.1, 2, {}, false, 1e-4}, model);
  Rng rng(5);
  std::vector<InteractionRecord> batch;
  for (int i = 0; i < 4; ++i) batch.push_back(random_record(model, 4, 2, rng));
  learner.update(batch);
  const auto path =
      (std::filesystem::temp_directory_path() / "oltr_learner_ckpt.json")
          .string();
  save_learner_checkpoint(path, learner);
  const Learner loaded = load_learner_checkpoint(path);
  const auto [bare_model, bare_adam] = load_model_checkpoint(path);
  std::filesystem::remove(path);
  CHECK(loaded.kind() == LearnerKind::kRegLearn);
  CHECK(loaded.model().parameters() == learner.model().parameters());
  CHECK(loaded.weights().w == learner.weights().w);
  CHECK(loaded.weight_adam().second_moment ==
        learner.weight_adam().second_moment);
  CHECK(loaded.model_adam().step_count == 1);
  CHECK(bare_model.parameters() == learner.model().parameters());
}

}  // namespace
}  // namespace oltr
