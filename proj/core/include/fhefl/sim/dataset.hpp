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
#include <istream>
#include <span>
#include <string>
#include <vector>

namespace fhefl::sim {

/// Dense row-major feature matrix with integer class labels in [0, classes).
struct Dataset {
  std::size_t features = 0;
  std::size_t classes = 0;
  std::vector<double> x;
  std::vector<int> y;

  std::size_t size() const noexcept { return y.size(); }
  bool empty() const noexcept { return y.empty(); }
  std::span<const double> row(std::size_t i) const { return {x.data() + i * features, features}; }
  void push(std::span<const double> features_row, int label);
};

/// Rows of comma-separated numbers, last column an integer label. Blank lines
/// and lines starting with '#' are skipped. `classes` = 0 infers max label + 1.
Dataset parse_csv(std::istream& in, const std::string& source_name, std::size_t classes = 0);
Dataset load_csv(const std::string& path, std::size_t classes = 0);

struct SyntheticSpec {
  std::size_t classes = 10;
  std::size_t features = 64;
  std::size_t train_samples = 5000;
  std::size_t test_samples = 1000;
  /// Standard deviation of each class-mean coordinate; samples add unit noise.
  double separation = 0.35;
};

struct TrainTest {
  Dataset train;
  Dataset test;
};

/// Gaussian mixture: one mean per class, labels drawn uniformly.
TrainTest make_synthetic(const SyntheticSpec& spec, std::uint64_t seed);

/// Shuffles, then deals floor(size / users) samples to each user. Leftovers are dropped.
std::vector<Dataset> shard_iid(const Dataset& data, std::size_t users, std::uint64_t seed);

}  // namespace fhefl::sim
