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

#include "oltr/feedback.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "oltr/errors.h"

namespace oltr {

std::vector<double> ndcg_discounts(std::size_t k) {
  std::vector<double> d(k);
  for (std::size_t i = 0; i < k; ++i) {
    d[i] = 1.0 / std::log2(static_cast<double>(i) + 2.0);
  }
  return d;
}

double ndcg_at_k(std::span<const std::uint8_t> list_relevances,
                 std::size_t num_relevant_in_pool, std::size_t k) {
  if (list_relevances.size() < k) {
    throw ShapeError("nDCG@" + std::to_string(k) + " needs " +
                     std::to_string(k) + " relevances, got " +
                     std::to_string(list_relevances.size()));
  }
  if (num_relevant_in_pool == 0) {
    throw ContractError("nDCG is undefined for a pool without relevant items");
  }
  double dcg = 0.0;
  double idcg = 0.0;
  const std::size_t ideal = std::min(k, num_relevant_in_pool);
  for (std::size_t i = 0; i < k; ++i) {
    const double discount = 1.0 / std::log2(static_cast<double>(i) + 2.0);
    if (list_relevances[i] != 0) dcg += discount;
    if (i < ideal) idcg += discount;
  }
  return dcg / idcg;
}

void ClickConfig::validate() const {
  auto check = [&](double p, const char* what) {
    if (!(p >= 0.0 && p <= 1.0)) {
      throw ConfigError("click config '" + name + "': " + what +
                        " must be in [0, 1]");
    }
  };
  check(p_attract_relevant, "p(a|R)");
  check(p_attract_irrelevant, "p(a|IR)");
  for (double e : examination) check(e, "examination probability");
}

const std::vector<double>& default_examination() {
  static const std::vector<double> kExamination = {0.999, 0.959, 0.761, 0.592,
                                                   0.457};
  return kExamination;
}

ClickConfigSet ClickConfigSet::defaults() {
  ClickConfigSet set;
  set.attraction_["perfect"] = {1.0, 0.0};
  set.attraction_["locating"] = {0.95, 0.05};
  set.attraction_["entertaining"] = {0.9, 0.4};
  set.examination_ = default_examination();
  return set;
}

ClickConfigSet ClickConfigSet::parse(std::istream& in) {
  ClickConfigSet set = defaults();
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string::npos) {
      line.erase(hash);
    }
    std::istringstream fields(line);
    std::string name;
    if (!(fields >> name)) continue;
    std::vector<double> values;
    double v;
    while (fields >> v) values.push_back(v);
    if (!fields.eof()) {
      throw ConfigError("click config line " + std::to_string(line_no) +
                        ": malformed number");
    }
    if (name == "examination") {
      if (values.empty()) {
        throw ConfigError("click config line " + std::to_string(line_no) +
                          ": examination needs at least one value");
      }
      set.examination_ = values;
    } else {
      if (values.size() != 2) {
        throw ConfigError("click config line " + std::to_string(line_no) +
                          ": expected '<name> <p(a|R)> <p(a|IR)>'");
      }
      set.attraction_[name] = {values[0], values[1]};
    }
  }
  for (const auto& name : set.names()) {
    set.get(name, set.examination_.size()).validate();
  }
  return set;
}

ClickConfigSet ClickConfigSet::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open click config file " + path);
  return parse(in);
}

ClickConfig ClickConfigSet::get(const std::string& name, std::size_t k) const {
  auto it = attraction_.find(name);
  if (it == attraction_.end()) {
    throw ConfigError("unknown click configuration '" + name + "'");
  }
  if (k > examination_.size()) {
    throw ConfigError("list size k=" + std::to_string(k) + " exceeds the " +
                      std::to_string(examination_.size()) +
                      " available examination probabilities");
  }
  ClickConfig config;
  config.name = name;
  config.p_attract_relevant = it->second.relevant;
  config.p_attract_irrelevant = it->second.irrelevant;
  config.examination.assign(examination_.begin(),
                            examination_.begin() +
                                static_cast<std::ptrdiff_t>(k));
  return config;
}

std::vector<std::string> ClickConfigSet::names() const {
  std::vector<std::string> out;
  for (const auto& [name, _] : attraction_) out.push_back(name);
  return out;
}

std::vector<std::uint8_t> simulate_clicks_pbm(
    std::span<const std::uint8_t> list_relevances, const ClickConfig& config,
    Rng& rng) {
  if (config.examination.size() < list_relevances.size()) {
    throw ShapeError("click config has " +
                     std::to_string(config.examination.size()) +
                     " examination probabilities for a list of " +
                     std::to_string(list_relevances.size()));
  }
  std::vector<std::uint8_t> clicks(list_relevances.size());
  for (std::size_t i = 0; i < clicks.size(); ++i) {
    const double attract = list_relevances[i] != 0
                               ? config.p_attract_relevant
                               : config.p_attract_irrelevant;
    clicks[i] = uniform01(rng) < config.examination[i] * attract ? 1 : 0;
  }
  return clicks;
}

double ctr_feedback(std::span<const std::uint8_t> clicks) {
  double count = 0.0;
  for (auto c : clicks) count += c != 0 ? 1.0 : 0.0;
  return count;
}

}  // namespace oltr
