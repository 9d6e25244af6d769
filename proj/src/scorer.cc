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

#include "oltr/scorer.h"

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "oltr/errors.h"
#include "oltr/rng.h"

namespace oltr {

ScoringModel::ScoringModel(std::vector<int> layer_sizes)
    : layer_sizes_(std::move(layer_sizes)) {
  if (layer_sizes_.size() < 2) {
    throw ConfigError("scorer needs at least an input and an output layer");
  }
  Eigen::Index total = 0;
  for (std::size_t l = 0; l < layer_sizes_.size(); ++l) {
    if (layer_sizes_[l] <= 0) {
      throw ConfigError("layer size " + std::to_string(l) +
                        " must be positive, got " +
                        std::to_string(layer_sizes_[l]));
    }
    if (l == 0) continue;
    offsets_.push_back(total);
    total += static_cast<Eigen::Index>(layer_sizes_[l]) *
             (layer_sizes_[l - 1] + 1);
  }
  params_ = Vector::Zero(total);
}

Eigen::Map<Matrix> ScoringModel::weight(int layer) {
  return {params_.data() + offsets_[layer], layer_sizes_[layer + 1],
          layer_sizes_[layer]};
}

Eigen::Map<const Matrix> ScoringModel::weight(int layer) const {
  return {params_.data() + offsets_[layer], layer_sizes_[layer + 1],
          layer_sizes_[layer]};
}

Eigen::Map<Vector> ScoringModel::bias(int layer) {
  const Eigen::Index out = layer_sizes_[layer + 1];
  return {params_.data() + offsets_[layer] + out * layer_sizes_[layer], out};
}

Eigen::Map<const Vector> ScoringModel::bias(int layer) const {
  const Eigen::Index out = layer_sizes_[layer + 1];
  return {params_.data() + offsets_[layer] + out * layer_sizes_[layer], out};
}

ScoringModel init_model(std::vector<int> layer_sizes, std::uint64_t seed) {
  ScoringModel model(std::move(layer_sizes));
  Rng rng(derive_seed({seed, 0x5c0e}));
  for (int l = 0; l < model.num_layers(); ++l) {
    const double scale = std::sqrt(2.0 / model.layer_sizes()[l]);
    auto w = model.weight(l);
    for (Eigen::Index j = 0; j < w.cols(); ++j) {
      for (Eigen::Index i = 0; i < w.rows(); ++i) {
        w(i, j) = scale * standard_normal(rng);
      }
    }
  }
  return model;
}

namespace {

void check_inputs(const ScoringModel& model, Eigen::Index rows) {
  if (rows != model.input_dim()) {
    throw ShapeError("feature dimension " + std::to_string(rows) +
                     " does not match scorer input " +
                     std::to_string(model.input_dim()));
  }
}

// Forward pass keeping every post-activation (activations[0] = inputs) and
// every pre-activation of the hidden layers.
Matrix forward_cached(const ScoringModel& model,
                      const Eigen::Ref<const Matrix>& inputs,
                      std::vector<Matrix>* activations,
                      std::vector<Matrix>* preacts) {
  Matrix a = inputs;
  const int layers = model.num_layers();
  for (int l = 0; l < layers; ++l) {
    Matrix z = model.weight(l) * a;
    z.colwise() += model.bias(l);
    if (activations != nullptr) activations->push_back(std::move(a));
    if (l + 1 < layers) {
      if (preacts != nullptr) preacts->push_back(z);
      a = z.cwiseMax(0.0);
    } else {
      a = std::move(z);
    }
  }
  return a;
}

}  // namespace

Vector forward(const ScoringModel& model, const Eigen::Ref<const Vector>& x) {
  check_inputs(model, x.size());
  return forward_cached(model, x, nullptr, nullptr).col(0);
}

Matrix forward_batch(const ScoringModel& model,
                     const Eigen::Ref<const Matrix>& inputs) {
  check_inputs(model, inputs.rows());
  return forward_cached(model, inputs, nullptr, nullptr);
}

double score(const ScoringModel& model, const Eigen::Ref<const Vector>& x,
             int query) {
  if (query < 0 || query >= model.num_outputs()) {
    throw std::out_of_range("query " + std::to_string(query) +
                            " outside [0, " +
                            std::to_string(model.num_outputs()) + ")");
  }
  return forward(model, x)(query);
}

Vector backward_sum(const ScoringModel& model,
                    const Eigen::Ref<const Matrix>& inputs,
                    const Eigen::Ref<const Matrix>& output_grads) {
  check_inputs(model, inputs.rows());
  if (output_grads.rows() != model.num_outputs() ||
      output_grads.cols() != inputs.cols()) {
    throw ShapeError("output gradient shape does not match batch");
  }
  std::vector<Matrix> activations;
  std::vector<Matrix> preacts;
  forward_cached(model, inputs, &activations, &preacts);

  ScoringModel view = model;  // same layout, holds the gradient
  view.parameters().setZero();
  Matrix delta = output_grads;
  for (int l = model.num_layers() - 1; l >= 0; --l) {
    view.weight(l).noalias() = delta * activations[l].transpose();
    view.bias(l) = delta.rowwise().sum();
    if (l == 0) break;
    Matrix upstream = model.weight(l).transpose() * delta;
    delta = (preacts[l - 1].array() > 0.0).select(upstream, 0.0);
  }
  return std::move(view.parameters());
}

Vector backward(const ScoringModel& model,
                const Eigen::Ref<const Matrix>& inputs,
                const Eigen::Ref<const Matrix>& output_grads) {
  if (inputs.cols() == 0) throw ShapeError("backward needs a non-empty batch");
  return backward_sum(model, inputs, output_grads) /
         static_cast<double>(inputs.cols());
}

AdamState AdamState::for_size(Eigen::Index num_parameters,
                              double learning_rate) {
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) {
    throw ConfigError("learning rate must be positive and finite");
  }
  AdamState state;
  state.first_moment = Vector::Zero(num_parameters);
  state.second_moment = Vector::Zero(num_parameters);
  state.learning_rate = learning_rate;
  return state;
}

void adam_step(Vector& params, AdamState& state,
               const Eigen::Ref<const Vector>& grad) {
  if (grad.size() != params.size() ||
      state.first_moment.size() != params.size() ||
      state.second_moment.size() != params.size()) {
    throw ShapeError("gradient/moment shape does not match parameters");
  }
  if (!grad.allFinite()) {
    throw NumericError("non-finite gradient rejected by Adam");
  }
  const std::int64_t t = state.step_count + 1;
  Vector m = state.beta1 * state.first_moment + (1.0 - state.beta1) * grad;
  Vector v = state.beta2 * state.second_moment +
             (1.0 - state.beta2) * grad.cwiseProduct(grad);
  const double c1 = 1.0 - std::pow(state.beta1, static_cast<double>(t));
  const double c2 = 1.0 - std::pow(state.beta2, static_cast<double>(t));
  Vector updated =
      params - state.learning_rate *
                   ((m / c1).array() / ((v / c2).array().sqrt() + state.epsilon))
                       .matrix();
  if (!updated.allFinite()) {
    throw NumericError("Adam update produced non-finite parameters");
  }
  params = std::move(updated);
  state.first_moment = std::move(m);
  state.second_moment = std::move(v);
  state.step_count = t;
}

namespace {

nlohmann::json vector_to_json(const Vector& v) {
  return std::vector<double>(v.data(), v.data() + v.size());
}

Vector vector_from_json(const nlohmann::json& j) {
  const auto values = j.get<std::vector<double>>();
  return Eigen::Map<const Vector>(values.data(),
                                  static_cast<Eigen::Index>(values.size()));
}

}  // namespace

nlohmann::json to_json(const ScoringModel& model) {
  return {{"layer_sizes", model.layer_sizes()},
          {"activation", "relu"},
          {"parameters", vector_to_json(model.parameters())}};
}

nlohmann::json to_json(const AdamState& state) {
  return {{"first_moment", vector_to_json(state.first_moment)},
          {"second_moment", vector_to_json(state.second_moment)},
          {"step_count", state.step_count},
          {"learning_rate", state.learning_rate},
          {"beta1", state.beta1},
          {"beta2", state.beta2},
          {"epsilon", state.epsilon}};
}

ScoringModel model_from_json(const nlohmann::json& j) {
  ScoringModel model(j.at("layer_sizes").get<std::vector<int>>());
  Vector params = vector_from_json(j.at("parameters"));
  if (params.size() != model.num_parameters()) {
    throw ShapeError("checkpoint parameter count does not match layer sizes");
  }
  model.parameters() = std::move(params);
  return model;
}

AdamState adam_from_json(const nlohmann::json& j) {
  AdamState state;
  state.first_moment = vector_from_json(j.at("first_moment"));
  state.second_moment = vector_from_json(j.at("second_moment"));
  state.step_count = j.at("step_count").get<std::int64_t>();
  state.learning_rate = j.at("learning_rate").get<double>();
  state.beta1 = j.at("beta1").get<double>();
  state.beta2 = j.at("beta2").get<double>();
  state.epsilon = j.at("epsilon").get<double>();
  if (state.first_moment.size() != state.second_moment.size()) {
    throw ShapeError("Adam moments have different sizes");
  }
  return state;
}

void save_model_checkpoint(const std::string& path, const ScoringModel& model,
                           const AdamState& adam) {
  nlohmann::json j = {{"format", "oltr-checkpoint"},
                      {"version", 1},
                      {"model", to_json(model)},
                      {"adam", to_json(adam)}};
  std::ofstream out(path);
  if (!out) throw Error("cannot open " + path + " for writing");
  out << j.dump() << '\n';
}

std::pair<ScoringModel, AdamState> load_model_checkpoint(
    const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path);
  const nlohmann::json j = nlohmann::json::parse(in);
  ScoringModel model = model_from_json(j.at("model"));
  AdamState adam = adam_from_json(j.at("adam"));
  if (adam.first_moment.size() != model.num_parameters()) {
    throw ShapeError("Adam state does not match model parameters");
  }
  return {std::move(model), std::move(adam)};
}

}  // namespace oltr
