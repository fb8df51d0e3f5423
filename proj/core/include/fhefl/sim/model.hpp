/*
 * Copyright 2026 The FheFL Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "fhefl/prng.hpp"
#include "fhefl/robust_agg.hpp"
#include "fhefl/sim/dataset.hpp"

namespace fhefl::sim {

enum class Architecture { kLogistic, kMlp };

Architecture parse_architecture(std::string_view name);
std::string_view architecture_name(Architecture a);

/// Parameter layout, flat:
///   logistic: W (classes x features), b (classes)
///   mlp:      W1 (hidden x features), b1 (hidden), W2 (classes x hidden), b2 (classes); tanh hidden units
struct ModelSpec {
  Architecture architecture = Architecture::kLogistic;
  std::size_t features = 0;
  std::size_t classes = 0;
  std::size_t hidden = 0;

  std::size_t parameter_count() const;
  /// Parameters of the layer touching the input (the whole model for logistic).
  std::size_t first_layer_size() const;
};

/// Logistic starts at zero; the MLP uses uniform Glorot weights and zero biases.
std::vector<double> init_parameters(const ModelSpec& spec, Prng& prng);

/// Class scores for one sample.
std::vector<double> logits(const ModelSpec& spec, std::span<const double> w, std::span<const double> x);
int predict(const ModelSpec& spec, std::span<const double> w, std::span<const double> x);

/// Mean cross-entropy over `indices` (all samples when empty).
double loss(const ModelSpec& spec, std::span<const double> w, const Dataset& data,
            std::span<const std::size_t> indices = {});
/// As loss(), also writing d loss / d w into `grad` (resized to parameter_count()).
double loss_and_gradient(const ModelSpec& spec, std::span<const double> w, const Dataset& data,
                         std::span<const std::size_t> indices, std::vector<double>& grad);

double accuracy(const ModelSpec& spec, std::span<const double> w, const Dataset& data);
/// Accuracy per true class; classes absent from `data` report 0.
std::vector<double> per_class_accuracy(const ModelSpec& spec, std::span<const double> w, const Dataset& data);

struct TrainOptions {
  double learning_rate = 0.1;
  std::size_t epochs = 1;
  std::size_t batch_size = 10;
};

/// Mini-batch SGD from `w`. Returns the effective gradient (w_start - w_end) / eta,
/// or zeros when eta = 0. A non-finite loss raises ErrorCode::kNumerical.
GradientUpdate local_train(const ModelSpec& spec, std::span<const double> w, const Dataset& shard,
                           const TrainOptions& options, Prng& prng, std::uint64_t user_id = 0);

}  // namespace fhefl::sim
