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

#ifndef OLTR_SCORER_H_
#define OLTR_SCORER_H_

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "json.hpp"

namespace oltr {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

// Fully connected scorer f(x; q). Hidden layers use ReLU, the output layer
// is linear with one unit per standing query.
//
// All parameters live in one flat vector. Layer l stores its weight matrix
// (out x in, column-major) followed by its bias vector. Gradients returned
// by backward() use the same layout, which lets the optimizer and the
// finite-difference tests treat the model as a single vector.
class ScoringModel {
 public:
  ScoringModel() = default;

  // Zero-initialized model. Throws ConfigError unless there are at least two
  // sizes and all are positive.
  explicit ScoringModel(std::vector<int> layer_sizes);

  const std::vector<int>& layer_sizes() const { return layer_sizes_; }
  int input_dim() const { return layer_sizes_.front(); }
  int num_outputs() const { return layer_sizes_.back(); }
  int num_layers() const { return static_cast<int>(layer_sizes_.size()) - 1; }
  Eigen::Index num_parameters() const { return params_.size(); }

  Vector& parameters() { return params_; }
  const Vector& parameters() const { return params_; }

  Eigen::Map<Matrix> weight(int layer);
  Eigen::Map<const Matrix> weight(int layer) const;
  Eigen::Map<Vector> bias(int layer);
  Eigen::Map<const Vector> bias(int layer) const;

  bool all_finite() const { return params_.allFinite(); }

 private:
  std::vector<int> layer_sizes_;
  std::vector<Eigen::Index> offsets_;  // start of each layer's weights
  Vector params_;
};

// He-initialized model: weights ~ N(0, 2 / fan_in), biases zero.
ScoringModel init_model(std::vector<int> layer_sizes, std::uint64_t seed);

// Scores for every query. Throws ShapeError on a dimension mismatch.
Vector forward(const ScoringModel& model, const Eigen::Ref<const Vector>& x);

// Column-batched forward pass: `inputs` is d x N, the result is m x N.
Matrix forward_batch(const ScoringModel& model,
                     const Eigen::Ref<const Matrix>& inputs);

// f(x; q). Throws std::out_of_range if q is not a valid query.
double score(const ScoringModel& model, const Eigen::Ref<const Vector>& x,
             int query);

// Gradient of sum_n <output_grads[:, n], f(inputs[:, n])> with respect to the
// flat parameter vector. `inputs` is d x N, `output_grads` is m x N.
Vector backward_sum(const ScoringModel& model,
                    const Eigen::Ref<const Matrix>& inputs,
                    const Eigen::Ref<const Matrix>& output_grads);

// Same as backward_sum() divided by the batch size N (N must be > 0).
Vector backward(const ScoringModel& model,
                const Eigen::Ref<const Matrix>& inputs,
                const Eigen::Ref<const Matrix>& output_grads);

struct AdamState {
  Vector first_moment;
  Vector second_moment;
  std::int64_t step_count = 0;
  double learning_rate = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;

  static AdamState for_size(Eigen::Index num_parameters,
                            double learning_rate = 1e-4);
};

// One bias-corrected Adam step (descent on `grad`). A non-finite gradient or
// a shape mismatch throws and leaves both `params` and `state` unchanged.
void adam_step(Vector& params, AdamState& state,
               const Eigen::Ref<const Vector>& grad);

inline void adam_step(ScoringModel& model, AdamState& state,
                      const Eigen::Ref<const Vector>& grad) {
  adam_step(model.parameters(), state, grad);
}

// JSON containers. Doubles are written in shortest round-trip form, so a
// save/load cycle reproduces every parameter bit for bit.
nlohmann::json to_json(const ScoringModel& model);
nlohmann::json to_json(const AdamState& state);
ScoringModel model_from_json(const nlohmann::json& j);
AdamState adam_from_json(const nlohmann::json& j);

void save_model_checkpoint(const std::string& path, const ScoringModel& model,
                           const AdamState& adam);
std::pair<ScoringModel, AdamState> load_model_checkpoint(
    const std::string& path);

}  // namespace oltr

#endif  // OLTR_SCORER_H_
