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

#include "fhefl/sim/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "fhefl/error.hpp"

namespace fhefl::sim {

double poisoning_bound_threshold(std::size_t benign, std::size_t malicious, double g_sq) {
  require(benign >= 1 && malicious >= 1, ErrorCode::kInvalidArgument,
          "bound needs at least one benign and one malicious user");
  require(std::isfinite(g_sq) && g_sq >= 0.0, ErrorCode::kInvalidArgument, "G^2 must be finite and non-negative");
  const double b = static_cast<double>(benign);
  const double m = static_cast<double>(malicious);
  return (b - m) * (b + m - 1.0) * g_sq / (b * m - m * m + m);
}

BoundReport poisoning_bound_report(std::size_t benign, std::size_t malicious, double g_sq, double z_sq) {
  require(std::isfinite(z_sq) && z_sq >= 0.0, ErrorCode::kInvalidArgument, "Z^2 must be finite and non-negative");
  BoundReport r;
  r.benign = benign;
  r.malicious = malicious;
  r.g_sq = g_sq;
  r.z_sq = z_sq;
  r.threshold = poisoning_bound_threshold(benign, malicious, g_sq);
  r.satisfied = z_sq < r.threshold;
  return r;
}

BoundReport poisoning_bound_check(std::span<const UserHistory> history, std::size_t benign_override,
                             std::size_t malicious_override) {
  std::size_t benign = 0;
  std::size_t malicious = 0;
  double g_sq = 0.0;
  double worst_malicious = 0.0;
  for (const auto& h : history) {
    if (h.sq_norms.empty()) continue;
    const double mean =
        std::accumulate(h.sq_norms.begin(), h.sq_norms.end(), 0.0) / static_cast<double>(h.sq_norms.size());
    if (h.malicious) {
      ++malicious;
      worst_malicious = std::max(worst_malicious, mean);
    } else {
      ++benign;
      g_sq = std::max(g_sq, mean);
    }
  }
  require(benign > 0, ErrorCode::kInvalidArgument, "no benign user has gradient history");
  require(malicious > 0, ErrorCode::kInvalidArgument, "no malicious user has gradient history");
  return poisoning_bound_report(benign_override ? benign_override : benign,
                           malicious_override ? malicious_override : malicious, g_sq,
                           std::max(0.0, worst_malicious - g_sq));
}

}  // namespace fhefl::sim
