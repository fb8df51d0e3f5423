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

#include "fhefl/sim/attack.hpp"

#include <string>

#include "fhefl/error.hpp"

namespace fhefl::sim {

Dataset flip_labels(Dataset shard, const AttackConfig& cfg) {
  for (int& label : shard.y) {
    if (label == cfg.source) {
      label = cfg.target;
    } else if (label == cfg.target) {
      label = cfg.source;
    }
  }
  return shard;
}

double attack_success_rate(const ModelSpec& spec, std::span<const double> w, const Dataset& test,
                           const AttackConfig& cfg) {
  std::size_t total = 0;
  std::size_t hits = 0;
  for (std::size_t i = 0; i < test.size(); ++i) {
    if (test.y[i] != cfg.source) continue;
    ++total;
    hits += predict(spec, w, test.row(i)) == cfg.target;
  }
  require(total > 0, ErrorCode::kInvalidArgument,
          "test set has no samples of source label " + std::to_string(cfg.source));
  return static_cast<double>(hits) / static_cast<double>(total);
}

}  // namespace fhefl::sim
