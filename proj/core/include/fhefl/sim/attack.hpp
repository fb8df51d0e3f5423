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
#include <span>

#include "fhefl/sim/dataset.hpp"
#include "fhefl/sim/model.hpp"

namespace fhefl::sim {

/// Label-flipping attacker behaviour.
struct AttackConfig {
  int source = 1;
  int target = 7;
  /// Share of users that are malicious; at most 0.2 unless explicitly overridden.
  double fraction = 0.0;
  /// Local epochs for malicious users (benign users use the experiment's setting).
  std::size_t local_epochs = 5;
};

/// Swaps source and target labels. Applying it twice restores the shard.
Dataset flip_labels(Dataset shard, const AttackConfig& cfg);

/// Fraction of test samples with true label `source` predicted as `target`.
double attack_success_rate(const ModelSpec& spec, std::span<const double> w, const Dataset& test,
                           const AttackConfig& cfg);

}  // namespace fhefl::sim
