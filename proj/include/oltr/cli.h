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

#ifndef OLTR_CLI_H_
#define OLTR_CLI_H_

#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "json.hpp"
#include "oltr/experiment.h"

namespace oltr {

// Exit codes of the command-line tool.
inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitUsage = 2;

// Parses argv and dispatches to train, compare or weights.
int run_cli(int argc, const char* const* argv, std::ostream& out,
            std::ostream& err);

// Quotes a CSV field when it contains a comma, quote or line break.
std::string csv_field(const std::string& value);
// Writes one CRLF-terminated record.
void write_csv_row(std::ostream& out, const std::vector<std::string>& fields);

// Everything `train` reports about one finished run.
struct RunSummary {
  std::string label;  // empty: config_label(config)
  ExperimentConfig config;
  OfflineResult offline;
  OfflineResult random;
  double online_final = 0.0;
  std::size_t interactions = 0;
  std::size_t explored = 0;
  std::vector<double> learned_weights;  // empty for PGLearn
  std::vector<double> ground_truth;
  std::optional<std::string> error;
};

nlohmann::json to_json(const RunSummary& summary);
RunSummary run_summary_from_json(const nlohmann::json& j);

struct TrainResult {
  RunSummary summary;
  OnlineResult online;
};

// Runs the online loop, then evaluates the final scorer and a random ranker
// on the same test pools.
TrainResult train_and_evaluate(const ExperimentConfig& config,
                               const Dataset& dataset);

// One aggregated row of a comparison.
struct CompareRow {
  std::string label;
  ExperimentConfig config;
  std::vector<std::uint64_t> seeds;
  std::vector<double> offline_batch_means;  // pooled over seeds
  std::vector<double> offline_seed_means;
  std::vector<double> online_seed_finals;
};

struct CompareTable {
  std::vector<CompareRow> rows;
  std::size_t best = 0;                   // highest offline mean
  std::vector<double> p_vs_best;          // offline batch-mean t-test
  std::vector<std::vector<double>> pairwise;  // offline, NaN on the diagonal
};

// Label shared by all seeds of one configuration.
std::string config_label(const ExperimentConfig& config);

// Groups summaries by label and computes p-values. Runs of one label must
// differ only in the seed. Throws ConfigError when
// fewer than two configurations are given or k differs between them.
CompareTable build_compare_table(const std::vector<RunSummary>& runs);

// Header: label,learner,feedback,click_config,k,epsilon,seeds,offline_mean,
// offline_std,online_mean,online_std,p_vs_best,marker.
void write_compare_csv(std::ostream& out, const CompareTable& table);
// Header: label_a,label_b,p_value.
void write_pairwise_csv(std::ostream& out, const CompareTable& table);

}  // namespace oltr

#endif  // OLTR_CLI_H_
