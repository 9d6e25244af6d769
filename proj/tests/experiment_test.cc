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

#include <cmath>
#include <set>

#include "doctest.h"
#include "oltr/errors.h"

namespace oltr {
namespace {

const Dataset& default_dataset() {
  static const Dataset ds = generate_synthetic_dataset(DatasetParams{}, 5, 1);
  return ds;
}

ExperimentConfig small_config() {
  ExperimentConfig c;
  c.num_batches = 20;
  c.batch_size = 20;
  c.eval_batches = 10;
  c.eval_batch_size = 50;
  c.hidden_layers = {16};
  return c;
}

TEST_CASE("zero noise gives identical features within a query") {
  DatasetParams p;
  p.noise_scale = 0.0;
  p.multi_relevance_prob = 0.0;
  const Dataset ds = generate_synthetic_dataset(p, 5, 3);
  for (std::size_t i = 0; i < ds.num_items(); ++i) {
    const int q = ds.relevance_set(static_cast<ItemId>(i)).front();
    CHECK(ds.relevance_set(static_cast<ItemId>(i)).size() == 1);
    CHECK(ds.features().col(static_cast<Eigen::Index>(i)) ==
          ds.prototypes().col(q));
  }
}

TEST_CASE("dataset invariants") {
  const Dataset& ds = default_dataset();
  CHECK_NOTHROW(ds.check_invariants(5));
  CHECK(ds.num_items() == 2000);
  CHECK(ds.split(Split::kTrain).size() + ds.split(Split::kTest).size() == 2000);
  std::set<ItemId> train(ds.split(Split::kTrain).begin(),
                         ds.split(Split::kTrain).end());
  for (ItemId id : ds.split(Split::kTest)) CHECK_FALSE(train.contains(id));
  for (int q = 0; q < ds.num_queries(); ++q) {
    CHECK(ds.relevant_items(Split::kTrain, q).size() >= 5);
    CHECK(ds.relevant_items(Split::kTest, q).size() >= 5);
  }
  // Prototypes are unit vectors at least 60 degrees apart.
  const Matrix gram = ds.prototypes().transpose() * ds.prototypes();
  for (int a = 0; a < ds.num_queries(); ++a) {
    CHECK(gram(a, a) == doctest::Approx(1.0));
    for (int b = a + 1; b < ds.num_queries(); ++b) {
      CHECK(gram(a, b) <= 0.5 + 1e-12);
    }
  }
}

TEST_CASE("dataset generation is deterministic and validates sizes") {
  const Dataset a = generate_synthetic_dataset(DatasetParams{}, 5, 11);
  const Dataset b = generate_synthetic_dataset(DatasetParams{}, 5, 11);
  CHECK(a.features() == b.features());
  CHECK(a.split(Split::kTest) == b.split(Split::kTest));
  DatasetParams tiny;
  tiny.num_items = 50;
  CHECK_THROWS_AS(generate_synthetic_dataset(tiny, 5, 1), ConfigError);
}

TEST_CASE("nearest prototype recovers the query of single-query items") {
  // Two-query items sit halfway between their prototypes, so which of the
  // two is primary cannot be read off the features; they are left out.
  const Dataset& ds = default_dataset();
  std::size_t hits = 0, total = 0;
  for (std::size_t i = 0; i < ds.num_items(); ++i) {
    const auto& set = ds.relevance_set(static_cast<ItemId>(i));
    if (set.size() != 1) continue;
    const auto x = ds.features().col(static_cast<Eigen::Index>(i));
    Eigen::Index best = 0;
    (ds.prototypes().colwise() - x).colwise().squaredNorm().minCoeff(&best);
    hits += best == set.front();
    ++total;
  }
  CHECK(static_cast<double>(hits) / static_cast<double>(total) >= 0.9);
}

TEST_CASE("sample_interaction always includes a relevant item") {
  const Dataset& ds = default_dataset();
  Rng rng(1);
  std::vector<int> per_query(ds.num_queries());
  const int n = 100000;
  for (int i = 0; i < n; ++i) {
    const auto inter = sample_interaction(ds, Split::kTrain, 5, 20, rng);
    CHECK(inter.num_relevant >= 1);
    CHECK(std::set<ItemId>(inter.pool.begin(), inter.pool.end()).size() == 20);
    ++per_query[inter.query];
  }
  for (int count : per_query) {
    CHECK(std::abs(count / static_cast<double>(n) - 0.1) < 0.01);
  }
}

TEST_CASE("sample_interaction with c equal to the split size") {
  const Dataset& ds = default_dataset();
  Rng rng(2);
  const auto& test = ds.split(Split::kTest);
  const auto inter = sample_interaction(ds, Split::kTest, 5, test.size(), rng);
  CHECK(std::set<ItemId>(inter.pool.begin(), inter.pool.end()) ==
        std::set<ItemId>(test.begin(), test.end()));
  CHECK_THROWS_AS(sample_interaction(ds, Split::kTest, 5, test.size() + 1, rng),
                  ConfigError);
}

TEST_CASE("zero batches leave the learner at its initial state") {
  ExperimentConfig c = small_config();
  c.num_batches = 0;
  const Learner initial = make_learner(c, default_dataset());
  const OnlineResult r = run_online(c, default_dataset());
  CHECK(r.log.rows.empty());
  CHECK(r.learner.model().parameters() == initial.model().parameters());
  CHECK(r.learner.weights().w == initial.weights().w);
}

TEST_CASE("running average recurrence and weight snapshots") {
  ExperimentConfig c = small_config();
  const OnlineResult r = run_online(c, default_dataset());
  REQUIRE(r.log.rows.size() == 20);
  double prev = 0.0;
  for (std::size_t t = 1; t <= r.log.rows.size(); ++t) {
    const auto& row = r.log.rows[t - 1];
    CHECK(row.batch == t);
    const double expected =
        ((t - 1) * prev + row.mean_ndcg) / static_cast<double>(t);
    CHECK(std::abs(row.running_ndcg - expected) < 1e-12);
    CHECK(row.weights.size() == 5);
    CHECK(std::isfinite(row.loss));
    prev = row.running_ndcg;
  }
}

TEST_CASE("runs are deterministic") {
  ExperimentConfig c = small_config();
  c.learner = LearnerKind::kPGLearn;
  const OnlineResult a = run_online(c, default_dataset());
  const OnlineResult b = run_online(c, default_dataset());
  std::ostringstream ca, cb;
  a.log.write_csv(ca);
  b.log.write_csv(cb);
  CHECK(ca.str() == cb.str());
  CHECK(a.learner.model().parameters() == b.learner.model().parameters());
  c.seed = 2;
  std::ostringstream cc;
  run_online(c, default_dataset()).log.write_csv(cc);
  CHECK(cc.str() != ca.str());
}

TEST_CASE("learning curve csv layout") {
  MetricsLog log{2, {{1, 0.5, 0.5, 0.25, {1.0, 0.75}, 0},
                     {2, 1.0, 0.75, std::nan(""), {}, 0}}};
  std::ostringstream out;
  log.write_csv(out);
  CHECK(out.str() ==
        "batch,mean_ndcg,running_ndcg,loss,w_1,w_2\r\n"
        "1,0.5,0.5,0.25,1,0.75\r\n"
        "2,1,0.75,,,\r\n");
}

TEST_CASE("pure exploration tracks the random-ranking expectation") {
  const Dataset& ds = default_dataset();
  const double random =
      random_baseline_ndcg(ds, Split::kTrain, 5, 20, 100000, 7);
  for (auto kind : {LearnerKind::kPGLearn, LearnerKind::kRegLearn,
                    LearnerKind::kOracleLearn}) {
    ExperimentConfig c;
    c.learner = kind;
    c.epsilon = 1.0;
    c.num_batches = 100;
    const OnlineResult r = run_online(c, ds);
    CHECK(std::abs(r.final_running_ndcg() - random) < 0.02);
    CHECK(r.explored == r.interactions);
  }
}

TEST_CASE("exploration accounting matches epsilon") {
  ExperimentConfig c;
  c.epsilon = 0.3;
  c.num_batches = 50;
  const OnlineResult r = run_online(c, default_dataset());
  const double n = static_cast<double>(r.interactions);
  const double se = std::sqrt(0.3 * 0.7 / n);
  CHECK(std::abs(r.explored / n - 0.3) <= 3 * se);
}

TEST_CASE("OracleLearn improves with nDCG@2 feedback") {
  ExperimentConfig c;
  c.learner = LearnerKind::kOracleLearn;
  c.k = 2;
  c.num_batches = 1000;
  const Dataset ds = generate_synthetic_dataset(DatasetParams{}, 2, 1);
  const OnlineResult r = run_online(c, ds);
  double first = 0.0, last = 0.0;
  for (std::size_t i = 0; i < 500; ++i) {
    first += r.log.rows[i].running_ndcg / 500;
    last += r.log.rows[500 + i].running_ndcg / 500;
  }
  CHECK(last > first);
}

TEST_CASE("untrained zero model ranks like a random ranker") {
  const Dataset& ds = default_dataset();
  ExperimentConfig c;
  c.hidden_layers = {};
  ScoringModel zero({ds.feature_dim(), ds.num_queries()});
  const double random = random_baseline_ndcg(ds, Split::kTest, 5, 20, 100000, 3);
  CHECK(std::abs(evaluate_offline(zero, ds, c).mean - random) < 0.02);
  CHECK(std::abs(evaluate_random(ds, c).mean - random) < 0.02);
}

TEST_CASE("a scorer that outputs true relevance is perfect offline") {
  const Dataset& ds = default_dataset();
  ExperimentConfig c;
  const BatchScorer cheat = [&](std::span<const Interaction> batch) {
    std::vector<std::vector<double>> out;
    for (const auto& inter : batch) {
      out.emplace_back(inter.relevance.begin(), inter.relevance.end());
    }
    return out;
  };
  const OfflineResult r = evaluate_offline(cheat, ds, c);
  CHECK(r.mean == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(r.batch_means.size() == 150);
}

TEST_CASE("offline evaluation is deterministic") {
  const Dataset& ds = default_dataset();
  ExperimentConfig c = small_config();
  const ScoringModel model = init_model({16, 8, 10}, 4);
  const auto a = evaluate_offline(model, ds, c);
  const auto b = evaluate_offline(model, ds, c);
  CHECK(a.mean == b.mean);
  CHECK(a.batch_means == b.batch_means);
}

TEST_CASE("t-test matches reference values") {
  const std::vector<double> a{1, 2, 3, 4, 5}, b{2, 3, 4, 5, 6};
  CHECK(t_test_two_tailed(a, b) == doctest::Approx(0.34659350708733416).epsilon(1e-9));
  CHECK(t_test_two_tailed(a, b, TTestVariant::kPooled) ==
        doctest::Approx(0.34659350708733416).epsilon(1e-9));
  const std::vector<double> c{0.1, 0.5, 0.3, 0.9}, d{1.2, 0.8, 1.9, 1.1, 1.4, 1.0};
  CHECK(std::abs(t_test_two_tailed(c, d) - 0.011387555348059446) < 1e-6);
  CHECK(std::abs(t_test_two_tailed(c, d, TTestVariant::kPooled) -
                 0.010895537577651203) < 1e-6);
  CHECK(t_test_two_tailed(a, a) == 1.0);
}

TEST_CASE("t-test on separated samples and degenerate input") {
  const std::vector<double> zeros{0, 1e-9, 0, -1e-9, 0};
  const std::vector<double> ones{1, 1 + 1e-9, 1, 1 - 1e-9, 1};
  CHECK(t_test_two_tailed(zeros, ones) < 1e-6);
  CHECK_THROWS_AS(t_test_two_tailed(std::vector<double>{1.0}, ones),
                  ContractError);
  const std::vector<double> flat{2, 2, 2};
  CHECK_THROWS_AS(t_test_two_tailed(flat, flat), ContractError);
}

TEST_CASE("weight_distance examples") {
  const std::vector<double> e1{1, 0, 0, 0, 0}, zero(5, 0.0);
  CHECK(weight_distance(e1, zero).distance == 1.0);
  const std::vector<double> truth{1, 0.6309, 0.5, 0.4307, 0.3869};
  const auto same = weight_distance(truth, truth);
  CHECK(same.distance == 0.0);
  CHECK(same.strictly_decreasing);
  CHECK(same.order_matches);
  const auto swapped = weight_distance(std::vector<double>{1, 0.5, 0.6309, 0.4307, 0.3869}, truth);
  CHECK_FALSE(swapped.strictly_decreasing);
  CHECK_FALSE(swapped.order_matches);
  CHECK_THROWS_AS(weight_distance(e1, std::vector<double>{1.0}), ShapeError);
}

TEST_CASE("ground-truth position weights") {
  ExperimentConfig c;
  const auto nd = ground_truth_weights(c);
  CHECK(nd[1] == doctest::Approx(0.6309).epsilon(1e-4));
  c.feedback = FeedbackKind::kClicks;
  CHECK(ground_truth_weights(c) ==
        std::vector<double>{0.999, 0.959, 0.761, 0.592, 0.457});
  c.k = 7;
  CHECK_THROWS_AS(c.validate(), ConfigError);
}

TEST_CASE("experiment config round-trips through json") {
  ExperimentConfig c;
  c.learner = LearnerKind::kPGLearn;
  c.feedback = FeedbackKind::kClicks;
  c.click_config = "locating";
  c.epsilon = 0.25;
  c.dataset.noise_scale = 0.125;
  c.hidden_layers = {32};
  const ExperimentConfig back = experiment_config_from_json(to_json(c));
  CHECK(to_json(back) == to_json(c));
  CHECK_THROWS_AS(experiment_config_from_json({{"epsilonn", 0.1}}), ConfigError);
  CHECK(experiment_config_from_json({{"k", 2}}).k == 2);
}

}  // namespace
}  // namespace oltr
