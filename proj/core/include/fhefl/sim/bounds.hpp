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
#include <vector>

namespace fhefl::sim {

struct BoundReport {
  std::size_t benign = 0;
  std::size_t malicious = 0;
  double g_sq = 0.0;
  double z_sq = 0.0;
  double threshold = 0.0;
  bool satisfied = false;
};

/// (|B| - |M|)(|B| + |M| - 1) G^2 / (|B||M| - |M|^2 + |M|). Needs |B|, |M| >= 1.
double poisoning_bound_threshold(std::size_t benign, std::size_t malicious, double g_sq);

/// Report with satisfied = (Z^2 < threshold).
BoundReport poisoning_bound_report(std::size_t benign, std::size_t malicious, double g_sq, double z_sq);

/// Squared gradient norms observed for one user across rounds.
struct UserHistory {
  std::uint64_t user_id = 0;
  bool malicious = false;
  std::vector<double> sq_norms;
};

/// G^2 = max over benign users of their mean squared norm; Z^2 = max over
/// malicious users minus G^2, floored at 0. |B| and |M| are the role counts in
/// `history` unless overridden (e.g. with per-round roster sizes).
BoundReport poisoning_bound_check(std::span<const UserHistory> history, std::size_t benign_override = 0,
                             std::size_t malicious_override = 0);

}  // namespace fhefl::sim
