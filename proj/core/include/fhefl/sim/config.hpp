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
#include <string>
#include <vector>

#include "fhefl/robust_agg.hpp"
#include "fhefl/sim/attack.hpp"
#include "fhefl/sim/dataset.hpp"
#include "fhefl/sim/model.hpp"

namespace fhefl::sim {

enum class Mode { kPlain, kEncrypted };
enum class RosterMode { kPinned, kRandom };
enum class EncryptScope { kFull, kFirstLayer };

Mode parse_mode(std::string_view name);
std::string_view mode_name(Mode m);

struct DatasetConfig {
  /// "synthetic" or "csv".
  std::string kind = "synthetic";
  SyntheticSpec synthetic;
  std::string train_path;
  std::string test_path;
  /// 0 infers the class count from the labels.
  std::size_t classes = 0;
};

struct ExperimentConfig {
  DatasetConfig dataset;
  Architecture architecture = Architecture::kLogistic;
  std::size_t hidden = 32;
  std::size_t users = 100;
  std::size_t roster_size = 10;
  RosterMode roster_mode = RosterMode::kPinned;
  AttackConfig attack;
  Aggregator aggregator = Aggregator::kFheFL;
  double trim_beta = 0.1;
  std::size_t krum_f = 2;
  Mode mode = Mode::kPlain;
  std::string preset = "test-1024";
  EncryptScope encrypt_scope = EncryptScope::kFull;
  double learning_rate = 0.1;
  std::size_t local_epochs = 5;
  std::size_t batch_size = 10;
  std::size_t rounds = 100;
  /// Stop once ||w_{i+1} - w_i|| <= epsilon; 0 runs every round.
  double epsilon = 0.0;
  std::vector<std::uint64_t> seeds{1};
  bool override_attacker_cap = false;

  /// Throws ErrorCode::kInvalidArgument describing the first violated constraint.
  void validate() const;
};

/// Parses and validates a JSON document. Unknown keys are rejected.
ExperimentConfig parse_config(const std::string& json_text);
ExperimentConfig load_config(const std::string& path);
std::string to_json(const ExperimentConfig& cfg);

}  // namespace fhefl::sim
