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

#include "fhefl/sim/model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "fhefl/error.hpp"

namespace fhefl::sim {

Architecture parse_architecture(std::string_view name) {
  if (name == "logistic") return Architecture::kLogistic;
  if (name == "mlp") return Architecture::kMlp;
  fail(ErrorCode::kInvalidArgument, "unknown architecture '" + std::string(name) + "'");
}

std::string_view architecture_name(Architecture a) {
  return a == Architecture::kLogistic ? "logistic" : "mlp";
}

std::size_t ModelSpec::parameter_count() const {
  if (architecture == Architecture::kLogistic) return classes * features + classes;
  return hidden * features + hidden + classes * hidden + classes;
}

std::size_t ModelSpec::first_layer_size() const {
  if (architecture == Architecture::kLogistic) return parameter_count();
  return hidden * features + hidden;
}

namespace {

void check_spec(const ModelSpec& spec, std::span<const double> w) {
  require(spec.features > 0 && spec.classes >= 2, ErrorCode::kInvalidArgument, "model needs features and >= 2 classes");
  require(spec.architecture == Architecture::kLogistic || spec.hidden > 0, ErrorCode::kInvalidArgument,
          "mlp needs at least one hidden unit");
  require(w.size() == spec.parameter_count(), ErrorCode::kDimensionMismatch,
          "parameter vector has " + std::to_string(w.size()) + " entries, model expects " +
              std::to_string(spec.parameter_count()));
}

// Dense layer: out = W x + b, W row-major (rows x cols) followed by b.
void dense(const double* wb, std::size_t rows, std::size_t cols, const double* x, double* out) {
  const double* bias = wb + rows * cols;
  for (std::size_t r = 0; r < rows; ++r) {
    const double* wr = wb + r * cols;
    double acc = bias[r];
    for (std::size_t c = 0; c < cols; ++c) acc += wr[c] * x[c];
    out[r] = acc;
  }
}

// Softmax in place; returns log-sum-exp.
double softmax(std::vector<double>& z) {
  const double m = *std::max_element(z.begin(), z.end());
  double sum = 0.0;
  for (double& v : z) {
    v = std::exp(v - m);
    sum += v;
  }
  for (double& v : z) v /= sum;
  return m + std::log(sum);
}

struct Workspace {
  std::vector<double> hidden;
  std::vector<double> scores;
  std::vector<double> delta_hidden;
};

// Forward pass; leaves activations in ws. Returns nothing, scores are logits.
void forward(const ModelSpec& spec, std::span<const double> w, std::span<const double> x, Workspace& ws) {
  ws.scores.resize(spec.classes);
  if (spec.architecture == Architecture::kLogistic) {
    dense(w.data(), spec.classes, spec.features, x.data(), ws.scores.data());
    return;
  }
  ws.hidden.resize(spec.hidden);
  dense(w.data(), spec.hidden, spec.features, x.data(), ws.hidden.data());
  for (double& h : ws.hidden) h = std::tanh(h);
  dense(w.data() + spec.first_layer_size(), spec.classes, spec.hidden, ws.hidden.data(), ws.scores.data());
}

// Per-sample cross-entropy, accumulating scale * gradient into grad when non-null.
double sample_loss(const ModelSpec& spec, std::span<const double> w, std::span<const double> x, int label,
                   Workspace& ws, double* grad, double scale) {
  forward(spec, w, x, ws);
  const double raw = ws.scores[static_cast<std::size_t>(label)];
  const double lse = softmax(ws.scores);
  const double value = lse - raw;
  if (grad == nullptr) return value;

  // ws.scores now holds probabilities; d loss / d logits = p - onehot.
  ws.scores[static_cast<std::size_t>(label)] -= 1.0;
  const std::size_t in = spec.architecture == Architecture::kLogistic ? spec.features : spec.hidden;
  const double* input = spec.architecture == Architecture::kLogistic ? x.data() : ws.hidden.data();
  const std::size_t out_offset = spec.architecture == Architecture::kLogistic ? 0 : spec.first_layer_size();
  double* gw = grad + out_offset;
  double* gb = gw + spec.classes * in;
  for (std::size_t c = 0; c < spec.classes; ++c) {
    const double d = scale * ws.scores[c];
    double* row = gw + c * in;
    for (std::size_t i = 0; i < in; ++i) row[i] += d * input[i];
    gb[c] += d;
  }
  if (spec.architecture == Architecture::kLogistic) return value;

  const double* w2 = w.data() + spec.first_layer_size();
  ws.delta_hidden.assign(spec.hidden, 0.0);
  for (std::size_t c = 0; c < spec.classes; ++c) {
    const double d = ws.scores[c];
    const double* row = w2 + c * spec.hidden;
    for (std::size_t h = 0; h < spec.hidden; ++h) ws.delta_hidden[h] += d * row[h];
  }
  double* g1 = grad;
  double* gb1 = grad + spec.hidden * spec.features;
  for (std::size_t h = 0; h < spec.hidden; ++h) {
    const double a = ws.hidden[h];
    const double d = scale * ws.delta_hidden[h] * (1.0 - a * a);
    double* row = g1 + h * spec.features;
    for (std::size_t f = 0; f < spec.features; ++f) row[f] += d * x[f];
    gb1[h] += d;
  }
  return value;
}

double batch_loss(const ModelSpec& spec, std::span<const double> w, const Dataset& data,
                  std::span<const std::size_t> indices, double* grad) {
  check_spec(spec, w);
  require(data.features == spec.features, ErrorCode::kDimensionMismatch, "dataset and model feature counts differ");
  const std::size_t count = indices.empty() ? data.size() : indices.size();
  require(count > 0, ErrorCode::kInvalidArgument, "loss over an empty batch");
  Workspace ws;
  const double scale = 1.0 / static_cast<double>(count);
  double total = 0.0;
  for (std::size_t n = 0; n < count; ++n) {
    const std::size_t i = indices.empty() ? n : indices[n];
    total += sample_loss(spec, w, data.row(i), data.y[i], ws, grad, scale);
  }
  return total * scale;
}

}  // namespace

std::vector<double> init_parameters(const ModelSpec& spec, Prng& prng) {
  std::vector<double> w(spec.parameter_count(), 0.0);
  check_spec(spec, w);
  if (spec.architecture == Architecture::kLogistic) return w;
  auto glorot = [&](double* begin, std::size_t rows, std::size_t cols) {
    const double limit = std::sqrt(6.0 / static_cast<double>(rows + cols));
    for (std::size_t i = 0; i < rows * cols; ++i) begin[i] = limit * (2.0 * prng.uniform_unit() - 1.0);
  };
  glorot(w.data(), spec.hidden, spec.features);
  glorot(w.data() + spec.first_layer_size(), spec.classes, spec.hidden);
  return w;
}

std::vector<double> logits(const ModelSpec& spec, std::span<const double> w, std::span<const double> x) {
  check_spec(spec, w);
  require(x.size() == spec.features, ErrorCode::kDimensionMismatch, "sample has the wrong feature count");
  Workspace ws;
  forward(spec, w, x, ws);
  return ws.scores;
}

int predict(const ModelSpec& spec, std::span<const double> w, std::span<const double> x) {
  const auto z = logits(spec, w, x);
  return static_cast<int>(std::max_element(z.begin(), z.end()) - z.begin());
}

double loss(const ModelSpec& spec, std::span<const double> w, const Dataset& data,
            std::span<const std::size_t> indices) {
  return batch_loss(spec, w, data, indices, nullptr);
}

double loss_and_gradient(const ModelSpec& spec, std::span<const double> w, const Dataset& data,
                         std::span<const std::size_t> indices, std::vector<double>& grad) {
  grad.assign(spec.parameter_count(), 0.0);
  return batch_loss(spec, w, data, indices, grad.data());
}

double accuracy(const ModelSpec& spec, std::span<const double> w, const Dataset& data) {
  require(!data.empty(), ErrorCode::kInvalidArgument, "accuracy over an empty dataset");
  std::size_t correct = 0;
  for (std::size_t i = 0; i < data.size(); ++i) correct += predict(spec, w, data.row(i)) == data.y[i];
  return static_cast<double>(correct) / static_cast<double>(data.size());
}

std::vector<double> per_class_accuracy(const ModelSpec& spec, std::span<const double> w, const Dataset& data) {
  std::vector<double> correct(spec.classes, 0.0);
  std::vector<double> total(spec.classes, 0.0);
  for (std::size_t i = 0; i < data.size(); ++i) {
    const auto c = static_cast<std::size_t>(data.y[i]);
    total[c] += 1.0;
    correct[c] += predict(spec, w, data.row(i)) == data.y[i];
  }
  for (std::size_t c = 0; c < spec.classes; ++c) correct[c] = total[c] > 0 ? correct[c] / total[c] : 0.0;
  return correct;
}

GradientUpdate local_train(const ModelSpec& spec, std::span<const double> w, const Dataset& shard,
                           const TrainOptions& options, Prng& prng, std::uint64_t user_id) {
  check_spec(spec, w);
  require(!shard.empty(), ErrorCode::kInvalidArgument, "user " + std::to_string(user_id) + " has an empty shard");
  require(options.batch_size > 0, ErrorCode::kInvalidArgument, "batch size must be positive");
  require(std::isfinite(options.learning_rate) && options.learning_rate >= 0.0, ErrorCode::kInvalidArgument,
          "learning rate must be finite and non-negative");
  GradientUpdate update;
  update.user_id = user_id;
  update.learning_rate = options.learning_rate;
  if (options.learning_rate == 0.0) {
    update.values.assign(w.size(), 0.0);
    return update;
  }

  std::vector<double> current(w.begin(), w.end());
  std::vector<double> grad;
  std::vector<std::size_t> order(shard.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  for (std::size_t epoch = 0; epoch < options.epochs; ++epoch) {
    for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[prng.uniform_below(i)]);
    for (std::size_t start = 0; start < order.size(); start += options.batch_size) {
      const std::size_t stop = std::min(order.size(), start + options.batch_size);
      const double value =
          loss_and_gradient(spec, current, shard, std::span(order).subspan(start, stop - start), grad);
      require(std::isfinite(value), ErrorCode::kNumerical,
              "user " + std::to_string(user_id) + ": loss became non-finite in local epoch " +
                  std::to_string(epoch) + "; lower the learning rate");
      for (std::size_t k = 0; k < current.size(); ++k) current[k] -= options.learning_rate * grad[k];
    }
  }
  update.values.resize(w.size());
  for (std::size_t k = 0; k < w.size(); ++k) update.values[k] = (w[k] - current[k]) / options.learning_rate;
  return update;
}

}  // namespace fhefl::sim
