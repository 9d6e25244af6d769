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

#include "oltr/cli.h"

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <thread>

#include "CLI11.hpp"
#include "oltr/errors.h"
#include "oltr/format.h"

#ifndef OLTR_BUILD_ID
#define OLTR_BUILD_ID "unknown"
#endif

namespace oltr {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

constexpr double kSignificance = 0.05;

json nullable(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

json offline_json(const OfflineResult& r) {
  return {{"mean", r.mean},
          {"std", stddev_of(r.batch_means)},
          {"batch_means", r.batch_means}};
}

OfflineResult offline_from_json(const json& j) {
  OfflineResult r;
  r.mean = j.at("mean").get<double>();
  r.batch_means = j.at("batch_means").get<std::vector<double>>();
  return r;
}

// p-value or NaN when the samples are degenerate.
double safe_p_value(std::span<const double> a, std::span<const double> b) {
  try {
    return t_test_two_tailed(a, b);
  } catch (const ContractError&) {
    return std::nan("");
  }
}

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path);
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

void write_json_file(const fs::path& path, const json& j) {
  std::ofstream out(path);
  out << j.dump(2) << '\n';
  if (!out) throw Error("cannot write " + path.string());
}

// A summary file holds the config under "config"; a bare config file is
// the object itself.
ExperimentConfig config_from_file(const std::string& path) {
  const json j = read_json_file(path);
  return experiment_config_from_json(j.contains("config") ? j.at("config") : j);
}

// Deferred assignments from explicitly given flags onto a config.
using Appliers = std::vector<std::function<void(ExperimentConfig&)>>;

template <class T, class Set>
CLI::Option* add_config_flag(CLI::App* app, Appliers& appliers,
                             const std::string& name, const std::string& help,
                             Set set) {
  auto value = std::make_shared<T>();
  CLI::Option* opt = app->add_option(name, *value, help);
  // A repeated scalar flag keeps its last value.
  if constexpr (!CLI::detail::is_mutable_container<T>::value) {
    opt->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  }
  appliers.push_back([opt, value, set](ExperimentConfig& c) {
    if (opt->count() > 0) set(c, *value);
  });
  return opt;
}

void add_shared_flags(CLI::App* app, Appliers& a, bool single_run) {
  if (single_run) {
    add_config_flag<std::string>(
        app, a, "--learner", "pglearn | reglearn | oraclelearn",
        [](ExperimentConfig& c, const std::string& v) {
          c.learner = parse_learner_kind(v);
        });
    add_config_flag<double>(app, a, "--epsilon", "exploration rate",
                            [](ExperimentConfig& c, double v) { c.epsilon = v; });
    add_config_flag<std::uint64_t>(
        app, a, "--seed", "model and interaction seed",
        [](ExperimentConfig& c, std::uint64_t v) { c.seed = v; });
  }
  add_config_flag<std::string>(app, a, "--feedback", "ndcg | clicks",
                               [](ExperimentConfig& c, const std::string& v) {
                                 c.feedback = parse_feedback_kind(v);
                               });
  add_config_flag<std::string>(
      app, a, "--click-config", "perfect | locating | entertaining",
      [](ExperimentConfig& c, const std::string& v) { c.click_config = v; });
  add_config_flag<std::string>(
      app, a, "--click-file", "click configuration file",
      [](ExperimentConfig& c, const std::string& v) { c.click_config_file = v; });
  add_config_flag<std::size_t>(app, a, "--k", "list size",
                               [](ExperimentConfig& c, std::size_t v) { c.k = v; });
  add_config_flag<std::size_t>(
      app, a, "--batches", "training batches",
      [](ExperimentConfig& c, std::size_t v) { c.num_batches = v; });
  add_config_flag<std::size_t>(
      app, a, "--batch-size", "interactions per batch",
      [](ExperimentConfig& c, std::size_t v) { c.batch_size = v; });
  add_config_flag<std::size_t>(
      app, a, "--pool-size", "candidate pool size c",
      [](ExperimentConfig& c, std::size_t v) { c.pool_size = v; });
  add_config_flag<std::uint64_t>(
      app, a, "--dataset-seed", "synthetic corpus seed",
      [](ExperimentConfig& c, std::uint64_t v) { c.dataset_seed = v; });
  add_config_flag<double>(
      app, a, "--learning-rate", "Adam learning rate",
      [](ExperimentConfig& c, double v) { c.learning_rate = v; });
  add_config_flag<std::vector<int>>(
      app, a, "--hidden", "hidden layer sizes, comma separated",
      [](ExperimentConfig& c, const std::vector<int>& v) { c.hidden_layers = v; })
      ->delimiter(',');
  add_config_flag<bool>(
      app, a, "--reward-baseline", "subtract the batch-mean reward (pglearn)",
      [](ExperimentConfig& c, bool v) { c.use_reward_baseline = v; });
  add_config_flag<std::size_t>(
      app, a, "--eval-batches", "offline evaluation batches",
      [](ExperimentConfig& c, std::size_t v) { c.eval_batches = v; });
  add_config_flag<std::size_t>(
      app, a, "--eval-batch-size", "offline evaluation batch size",
      [](ExperimentConfig& c, std::size_t v) { c.eval_batch_size = v; });
  add_config_flag<int>(
      app, a, "--queries", "number of standing queries m",
      [](ExperimentConfig& c, int v) { c.dataset.num_queries = v; });
  add_config_flag<int>(app, a, "--items", "corpus size n",
                       [](ExperimentConfig& c, int v) { c.dataset.num_items = v; });
  add_config_flag<int>(
      app, a, "--dim", "feature dimension d",
      [](ExperimentConfig& c, int v) { c.dataset.feature_dim = v; });
  add_config_flag<double>(
      app, a, "--multi-relevance", "probability of a second relevant query",
      [](ExperimentConfig& c, double v) { c.dataset.multi_relevance_prob = v; });
  add_config_flag<double>(
      app, a, "--noise", "feature noise scale",
      [](ExperimentConfig& c, double v) { c.dataset.noise_scale = v; });
  add_config_flag<double>(
      app, a, "--train-fraction", "share of items in the training split",
      [](ExperimentConfig& c, double v) { c.dataset.train_fraction = v; });
}

ExperimentConfig build_config(const std::string& config_path,
                              const Appliers& appliers) {
  ExperimentConfig config =
      config_path.empty() ? ExperimentConfig{} : config_from_file(config_path);
  for (const auto& apply : appliers) apply(config);
  return config;
}

struct Manifest {
  Manifest(std::string command, fs::path dir)
      : command(std::move(command)), dir(std::move(dir)) {}

  std::string command;
  fs::path dir;
  json config;
  json seeds = json::array();
  std::vector<std::string> files;
  std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();

  void add(const std::string& file) { files.push_back(file); }

  void write(const std::optional<std::string>& error) const {
    const double seconds = std::chrono::duration<double>(
                               std::chrono::steady_clock::now() - start)
                               .count();
    json files_json = files;
    files_json.push_back("manifest.json");
    const json j = {{"command", command},
                    {"build_id", OLTR_BUILD_ID},
                    {"config", config},
                    {"seeds", seeds},
                    {"duration_seconds", seconds},
                    {"files", files_json},
                    {"error", error ? json(*error) : json(nullptr)}};
    std::error_code ec;
    fs::create_directories(dir, ec);
    std::ofstream out(dir / "manifest.json");
    out << j.dump(2) << '\n';
  }
};

void write_learning_curve(const fs::path& path, const MetricsLog& log) {
  std::ofstream out(path, std::ios::binary);
  log.write_csv(out);
  if (!out) throw Error("cannot write " + path.string());
}

void write_weights_csv(const fs::path& path, const std::vector<double>& learned,
                       const std::vector<double>& truth) {
  std::ofstream out(path, std::ios::binary);
  write_csv_row(out, {"position", "learned", "ground_truth"});
  for (std::size_t i = 0; i < truth.size(); ++i) {
    write_csv_row(out, {std::to_string(i + 1),
                        i < learned.size() ? format_double(learned[i]) : "",
                        format_double(truth[i])});
  }
  if (!out) throw Error("cannot write " + path.string());
}

std::string fixed(double v, int digits = 4) {
  if (!std::isfinite(v)) return "-";
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
  return buf;
}

std::string join(const std::vector<double>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) s += ' ';
    s += fixed(v[i]);
  }
  return s;
}

int cmd_train(const std::string& config_path, const Appliers& appliers,
              const std::string& out_dir, std::ostream& out,
              std::ostream& err) {
  Manifest manifest("train", out_dir);
  ExperimentConfig config;
  try {
    config = build_config(config_path, appliers);
    manifest.config = to_json(config);
    manifest.seeds = {{{"seed", config.seed},
                       {"dataset_seed", config.dataset_seed}}};
    config.validate();
  } catch (const Error& e) {
    err << "usage error: " << e.what() << '\n';
    manifest.write(std::string("usage error: ") + e.what());
    return kExitUsage;
  }

  try {
    fs::create_directories(manifest.dir);
    const Dataset dataset = make_dataset(config);
    TrainResult result = train_and_evaluate(config, dataset);
    const RunSummary& s = result.summary;

    write_learning_curve(manifest.dir / "learning_curve.csv", result.online.log);
    manifest.add("learning_curve.csv");
    write_weights_csv(manifest.dir / "weights.csv", s.learned_weights,
                      s.ground_truth);
    manifest.add("weights.csv");
    write_json_file(manifest.dir / "summary.json", to_json(s));
    manifest.add("summary.json");
    save_learner_checkpoint((manifest.dir / "checkpoint.json").string(),
                            result.online.learner);
    manifest.add("checkpoint.json");

    out << config_label(config) << " seed=" << config.seed << '\n'
        << "  offline nDCG@" << config.k << ": " << fixed(s.offline.mean)
        << " (random " << fixed(s.random.mean) << ")\n"
        << "  online nDCG@" << config.k << ": " << fixed(s.online_final)
        << '\n';
    if (!s.learned_weights.empty()) {
      out << "  w: " << join(s.learned_weights) << '\n';
    }
    if (s.error) {
      err << "run aborted: " << *s.error << '\n';
      manifest.write(s.error);
      return kExitFailure;
    }
    manifest.write(std::nullopt);
    return kExitOk;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    manifest.write(std::string(e.what()));
    return kExitFailure;
  }
}

void run_parallel(std::size_t jobs, unsigned threads,
                  const std::function<void(std::size_t)>& work) {
  threads = std::max(1u, std::min<unsigned>(threads, jobs));
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (std::size_t i = next++; i < jobs; i = next++) {
      try {
        work(i);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  for (unsigned t = 1; t < threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

void print_compare_table(std::ostream& out, const CompareTable& table) {
  std::size_t width = 5;
  for (const auto& row : table.rows) width = std::max(width, row.label.size());
  char line[512];
  std::snprintf(line, sizeof(line), "%-*s  %-17s  %-17s  %-9s\n",
                static_cast<int>(width), "label", "offline", "online",
                "p_vs_best");
  out << line;
  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    const auto& r = table.rows[i];
    const std::string offline = fixed(mean_of(r.offline_batch_means)) + " +- " +
                                fixed(stddev_of(r.offline_batch_means));
    const std::string online = fixed(mean_of(r.online_seed_finals)) + " +- " +
                               fixed(stddev_of(r.online_seed_finals));
    const double p = table.p_vs_best[i];
    const bool worse = i != table.best && p < kSignificance;
    std::snprintf(line, sizeof(line), "%-*s  %-17s  %-17s  %-9s%s\n",
                  static_cast<int>(width), r.label.c_str(), offline.c_str(),
                  online.c_str(), i == table.best ? "best" : fixed(p).c_str(),
                  worse ? " v" : "");
    out << line;
  }
}

int cmd_compare(const std::string& config_path, const Appliers& appliers,
                const std::vector<std::string>& learners,
                const std::vector<double>& epsilons,
                const std::vector<std::uint64_t>& seeds,
                const std::vector<std::string>& summaries, unsigned threads,
                const std::string& out_dir, std::ostream& out,
                std::ostream& err) {
  Manifest manifest("compare", out_dir);
  std::vector<ExperimentConfig> jobs;
  std::vector<RunSummary> runs;
  try {
    ExperimentConfig base = build_config(config_path, appliers);
    manifest.config = to_json(base);
    for (const auto& spec : summaries) {
      // Either a path or label=path.
      const auto eq = spec.find('=');
      const std::string path = eq == std::string::npos ? spec : spec.substr(eq + 1);
      runs.push_back(run_summary_from_json(read_json_file(path)));
      if (eq != std::string::npos) runs.back().label = spec.substr(0, eq);
    }
    if (!learners.empty() || !epsilons.empty() || summaries.empty()) {
      std::vector<LearnerKind> kinds;
      for (const auto& l : learners) kinds.push_back(parse_learner_kind(l));
      if (kinds.empty()) kinds.push_back(base.learner);
      const std::vector<double> eps =
          epsilons.empty() ? std::vector<double>{base.epsilon} : epsilons;
      const std::vector<std::uint64_t> seed_list =
          seeds.empty() ? std::vector<std::uint64_t>{base.seed} : seeds;
      for (auto kind : kinds) {
        for (double e : eps) {
          for (auto seed : seed_list) {
            ExperimentConfig c = base;
            c.learner = kind;
            c.epsilon = e;
            c.seed = seed;
            c.validate();
            jobs.push_back(c);
          }
        }
      }
      for (auto seed : seed_list) manifest.seeds.push_back(seed);
    }
    // Fail on a malformed comparison before spending time on training.
    std::vector<RunSummary> probe = runs;
    for (const auto& c : jobs) {
      probe.emplace_back();
      probe.back().config = c;
    }
    std::map<std::string, int> labels;
    for (const auto& r : probe) {
      labels[r.label.empty() ? config_label(r.config) : r.label] = 1;
    }
    if (labels.size() < 2) {
      throw ConfigError("compare needs at least two configurations");
    }
    for (const auto& r : probe) {
      if (r.config.k != probe.front().config.k) {
        throw ConfigError("comparison error: runs use different k");
      }
    }
  } catch (const Error& e) {
    err << "usage error: " << e.what() << '\n';
    if (!out_dir.empty()) {
      manifest.write(std::string("usage error: ") + e.what());
    }
    return kExitUsage;
  }

  try {
    std::vector<RunSummary> results(jobs.size());
    if (!jobs.empty()) {
      // Jobs share dataset parameters, so one corpus serves all of them.
      const Dataset dataset = make_dataset(jobs.front());
      std::mutex log_mutex;
      run_parallel(jobs.size(), threads, [&](std::size_t i) {
        results[i] = train_and_evaluate(jobs[i], dataset).summary;
        std::lock_guard lock(log_mutex);
        err << "finished " << config_label(jobs[i]) << " seed=" << jobs[i].seed
            << '\n';
      });
    }
    for (auto& r : results) {
      if (r.error) throw Error("run aborted: " + *r.error);
      runs.push_back(std::move(r));
    }
    const CompareTable table = build_compare_table(runs);
    print_compare_table(out, table);
    if (!out_dir.empty()) {
      fs::create_directories(manifest.dir);
      {
        std::ofstream f(manifest.dir / "compare.csv", std::ios::binary);
        write_compare_csv(f, table);
      }
      manifest.add("compare.csv");
      {
        std::ofstream f(manifest.dir / "compare_pvalues.csv", std::ios::binary);
        write_pairwise_csv(f, table);
      }
      manifest.add("compare_pvalues.csv");
      manifest.write(std::nullopt);
    }
    return kExitOk;
  } catch (const ConfigError& e) {
    err << "usage error: " << e.what() << '\n';
    if (!out_dir.empty()) manifest.write(std::string(e.what()));
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    if (!out_dir.empty()) manifest.write(std::string(e.what()));
    return kExitFailure;
  }
}

int cmd_weights(std::string checkpoint, const std::string& summary_path,
                const std::string& config_path, const Appliers& appliers,
                const std::string& out_dir, std::ostream& out,
                std::ostream& err) {
  ExperimentConfig config;
  std::optional<Learner> learner;
  try {
    if (!summary_path.empty()) {
      config = config_from_file(summary_path);
      if (checkpoint.empty()) {
        checkpoint =
            (fs::path(summary_path).parent_path() / "checkpoint.json").string();
      }
    } else if (!config_path.empty()) {
      config = config_from_file(config_path);
    }
    for (const auto& apply : appliers) apply(config);
    if (checkpoint.empty()) throw ConfigError("--checkpoint or --summary required");
    learner = load_learner_checkpoint(checkpoint);
    if (learner->kind() != LearnerKind::kRegLearn) {
      throw ConfigError("weights needs a reglearn checkpoint, got " +
                        to_string(learner->kind()));
    }
    config.k = learner->config().k;
  } catch (const Error& e) {
    err << "usage error: " << e.what() << '\n';
    return kExitUsage;
  }
  try {
    const Vector& w = learner->weights().w;
    const std::vector<double> learned(w.data(), w.data() + w.size());
    const std::vector<double> truth = ground_truth_weights(config);
    const WeightComparison cmp = weight_distance(learned, truth);
    write_csv_row(out, {"position", "learned", "ground_truth"});
    for (std::size_t i = 0; i < truth.size(); ++i) {
      write_csv_row(out, {std::to_string(i + 1), format_double(learned[i]),
                          format_double(truth[i])});
    }
    out << "distance " << format_double(cmp.distance) << '\n'
        << "strictly_decreasing " << (cmp.strictly_decreasing ? "true" : "false")
        << '\n'
        << "order_matches " << (cmp.order_matches ? "true" : "false") << '\n';
    if (!out_dir.empty()) {
      fs::create_directories(out_dir);
      write_weights_csv(fs::path(out_dir) / "weights.csv", learned, truth);
    }
    return kExitOk;
  } catch (const ConfigError& e) {
    err << "usage error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitFailure;
  }
}

}  // namespace

std::string csv_field(const std::string& value) {
  if (value.find_first_of(",\"\r\n") == std::string::npos) return value;
  std::string quoted = "\"";
  for (char ch : value) {
    if (ch == '"') quoted += '"';
    quoted += ch;
  }
  return quoted + '"';
}

void write_csv_row(std::ostream& out, const std::vector<std::string>& fields) {
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) out << ',';
    out << csv_field(fields[i]);
  }
  out << "\r\n";
}

json to_json(const RunSummary& s) {
  json weights = nullptr;
  json truth = s.ground_truth;
  json j = {{"config", to_json(s.config)},
            {"offline", offline_json(s.offline)},
            {"random", offline_json(s.random)},
            {"t_test_vs_random",
             {{"variant", "welch"},
              {"p_value", nullable(safe_p_value(s.offline.batch_means,
                                                s.random.batch_means))}}},
            {"online_final", s.online_final},
            {"interactions", s.interactions},
            {"explored", s.explored},
            {"ground_truth_weights", truth},
            {"error", s.error ? json(*s.error) : json(nullptr)}};
  if (!s.learned_weights.empty()) {
    const auto cmp = weight_distance(s.learned_weights, s.ground_truth);
    j["weights"] = {{"learned", s.learned_weights},
                    {"distance", nullable(cmp.distance)},
                    {"strictly_decreasing", cmp.strictly_decreasing},
                    {"order_matches", cmp.order_matches}};
  } else {
    j["weights"] = nullptr;
  }
  return j;
}

RunSummary run_summary_from_json(const json& j) {
  RunSummary s;
  try {
    s.config = experiment_config_from_json(j.at("config"));
    s.offline = offline_from_json(j.at("offline"));
    s.random = offline_from_json(j.at("random"));
    s.online_final = j.at("online_final").get<double>();
    s.interactions = j.value("interactions", std::size_t{0});
    s.explored = j.value("explored", std::size_t{0});
    s.ground_truth = j.at("ground_truth_weights").get<std::vector<double>>();
    if (j.contains("weights") && !j["weights"].is_null()) {
      s.learned_weights =
          j["weights"].at("learned").get<std::vector<double>>();
    }
    if (j.contains("error") && !j["error"].is_null()) {
      s.error = j["error"].get<std::string>();
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("bad summary: ") + e.what());
  }
  return s;
}

TrainResult train_and_evaluate(const ExperimentConfig& config,
                               const Dataset& dataset) {
  OnlineResult online = run_online(config, dataset);
  RunSummary s;
  s.config = config;
  s.offline = evaluate_offline(online.learner.model(), dataset, config);
  s.random = evaluate_random(dataset, config);
  s.online_final = online.final_running_ndcg();
  s.interactions = online.interactions;
  s.explored = online.explored;
  s.ground_truth = ground_truth_weights(config);
  if (online.learner.kind() != LearnerKind::kPGLearn) {
    const Vector& w = online.learner.weights().w;
    s.learned_weights.assign(w.data(), w.data() + w.size());
  }
  s.error = online.error;
  return {std::move(s), std::move(online)};
}

std::string config_label(const ExperimentConfig& c) {
  std::string label = to_string(c.learner) + " eps=" + format_double(c.epsilon) +
                      " " + to_string(c.feedback);
  if (c.feedback == FeedbackKind::kClicks) label += ":" + c.click_config;
  return label + " k=" + std::to_string(c.k);
}

CompareTable build_compare_table(const std::vector<RunSummary>& runs) {
  CompareTable table;
  std::map<std::string, std::size_t> index;
  for (const auto& run : runs) {
    const std::string label =
        run.label.empty() ? config_label(run.config) : run.label;
    auto [it, inserted] = index.emplace(label, table.rows.size());
    if (inserted) {
      table.rows.emplace_back();
      table.rows.back().label = label;
      table.rows.back().config = run.config;
    } else {
      // Seeds of one row must agree on everything else.
      json a = to_json(table.rows[it->second].config);
      json b = to_json(run.config);
      a.erase("seed");
      b.erase("seed");
      if (a != b) {
        throw ConfigError("runs labelled '" + label +
                          "' differ in more than the seed");
      }
    }
    CompareRow& row = table.rows[it->second];
    row.seeds.push_back(run.config.seed);
    row.offline_batch_means.insert(row.offline_batch_means.end(),
                                   run.offline.batch_means.begin(),
                                   run.offline.batch_means.end());
    row.offline_seed_means.push_back(run.offline.mean);
    row.online_seed_finals.push_back(run.online_final);
  }
  if (table.rows.size() < 2) {
    throw ConfigError("compare needs at least two configurations");
  }
  for (const auto& row : table.rows) {
    if (row.config.k != table.rows.front().config.k) {
      throw ConfigError("comparison error: runs use different k");
    }
  }
  const std::size_t n = table.rows.size();
  for (std::size_t i = 1; i < n; ++i) {
    if (mean_of(table.rows[i].offline_batch_means) >
        mean_of(table.rows[table.best].offline_batch_means)) {
      table.best = i;
    }
  }
  table.pairwise.assign(n, std::vector<double>(n, std::nan("")));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double p = safe_p_value(table.rows[i].offline_batch_means,
                                    table.rows[j].offline_batch_means);
      table.pairwise[i][j] = table.pairwise[j][i] = p;
    }
  }
  table.p_vs_best.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    table.p_vs_best[i] =
        i == table.best ? 1.0 : table.pairwise[i][table.best];
  }
  return table;
}

void write_compare_csv(std::ostream& out, const CompareTable& table) {
  write_csv_row(out, {"label", "learner", "feedback", "click_config", "k",
                      "epsilon", "seeds", "offline_mean", "offline_std",
                      "online_mean", "online_std", "p_vs_best", "marker"});
  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    const auto& r = table.rows[i];
    std::string seeds;
    for (auto s : r.seeds) {
      if (!seeds.empty()) seeds += ' ';
      seeds += std::to_string(s);
    }
    const double p = table.p_vs_best[i];
    const bool worse = i != table.best && p < kSignificance;
    write_csv_row(
        out,
        {r.label, to_string(r.config.learner), to_string(r.config.feedback),
         r.config.feedback == FeedbackKind::kClicks ? r.config.click_config : "",
         std::to_string(r.config.k), format_double(r.config.epsilon), seeds,
         format_double(mean_of(r.offline_batch_means)),
         format_double(stddev_of(r.offline_batch_means)),
         format_double(mean_of(r.online_seed_finals)),
         format_double(stddev_of(r.online_seed_finals)), format_double(p),
         i == table.best ? "best" : (worse ? "worse" : "")});
  }
}

void write_pairwise_csv(std::ostream& out, const CompareTable& table) {
  write_csv_row(out, {"label_a", "label_b", "p_value"});
  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    for (std::size_t j = i + 1; j < table.rows.size(); ++j) {
      write_csv_row(out, {table.rows[i].label, table.rows[j].label,
                          format_double(table.pairwise[i][j])});
    }
  }
}

int run_cli(int argc, const char* const* argv, std::ostream& out,
            std::ostream& err) {
  CLI::App app{"Online learning to rank from list-level feedback"};
  app.require_subcommand(1);

  std::string out_dir = "out";
  std::string config_path;

  Appliers train_flags;
  CLI::App* train = app.add_subcommand("train", "train and evaluate one run");
  add_shared_flags(train, train_flags, true);
  train->add_option("--out-dir", out_dir, "artifact directory");
  train->add_option("--config,--replay", config_path,
                    "config or summary.json to start from; flags override it");

  Appliers compare_flags;
  std::vector<std::string> learners;
  std::vector<double> epsilons;
  std::vector<std::uint64_t> seeds;
  std::vector<std::string> summaries;
  unsigned threads = 1;
  std::string compare_out;
  CLI::App* compare =
      app.add_subcommand("compare", "compare configurations over seeds");
  add_shared_flags(compare, compare_flags, false);
  compare->add_option("--learner", learners, "learners to compare")
      ->delimiter(',');
  compare->add_option("--epsilon", epsilons, "exploration rates")
      ->delimiter(',');
  compare->add_option("--seeds", seeds, "seeds shared by all configurations")
      ->delimiter(',');
  compare->add_option("--summary", summaries,
                      "summary.json of a finished run, optionally label=path");
  compare->add_option("--threads", threads, "concurrent runs")
      ->check(CLI::Range(1u, 256u));
  compare->add_option("--out-dir", compare_out, "artifact directory");
  compare->add_option("--config", config_path, "base config file");

  Appliers weight_flags;
  std::string checkpoint;
  std::string summary_path;
  std::string weights_out;
  CLI::App* weights =
      app.add_subcommand("weights", "compare learned position weights");
  weights->add_option("--checkpoint", checkpoint, "reglearn checkpoint");
  weights->add_option("--summary", summary_path,
                      "summary.json; its checkpoint.json is used by default");
  weights->add_option("--config", config_path, "config file");
  weights->add_option("--out-dir", weights_out, "write weights.csv here");
  add_config_flag<std::string>(weights, weight_flags, "--feedback",
                               "ndcg | clicks",
                               [](ExperimentConfig& c, const std::string& v) {
                                 c.feedback = parse_feedback_kind(v);
                               });
  add_config_flag<std::string>(
      weights, weight_flags, "--click-config", "click configuration",
      [](ExperimentConfig& c, const std::string& v) { c.click_config = v; });
  add_config_flag<std::string>(
      weights, weight_flags, "--click-file", "click configuration file",
      [](ExperimentConfig& c, const std::string& v) { c.click_config_file = v; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  if (train->parsed()) {
    return cmd_train(config_path, train_flags, out_dir, out, err);
  }
  if (compare->parsed()) {
    return cmd_compare(config_path, compare_flags, learners, epsilons, seeds,
                       summaries, threads, compare_out, out, err);
  }
  return cmd_weights(checkpoint, summary_path, config_path, weight_flags,
                     weights_out, out, err);
}

}  // namespace oltr
