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
#include <string>
#include <string_view>
#include <vector>

#include "fhefl/ring.hpp"

namespace fhefl {

/// Encryption parameters: a ring plus the fixed-point scale Delta = 2^scale_bits.
struct HeParams {
  std::string name;
  RingParamsPtr ring;
  int scale_bits = 40;

  double scale() const;
  std::size_t degree() const { return ring->degree(); }
  std::size_t max_level() const { return ring->max_level(); }
  /// Coefficient slots available to one plaintext (N/2).
  std::size_t slot_capacity() const { return ring->degree() / 2; }
  /// Widest gradient block w with w(2w-1) <= N; the rate-times-gradient product
  /// lands without interference only within this width.
  std::size_t block_capacity() const;
  /// Largest |value| that encodes without wrapping modulo the base primes.
  double max_encodable() const;
};

struct PresetSpec {
  std::string name;
  std::size_t degree;
  std::vector<int> base_bits;
  int scale_prime_bits;
  std::size_t levels;
  int special_bits;
  int scale_bits;
};

/// Generates the prime chain for a preset description.
HeParams make_params(const PresetSpec& spec);

/// Named presets: "test-16", "test-1024", "fhefl-8192", "fhefl-16384".
/// Generated once and cached; throws ErrorCode::kUnknownPreset otherwise.
const HeParams& preset(std::string_view name);
std::vector<std::string> preset_names();

/// Security estimate against the homomorphic-encryption standard table for
/// ternary secrets.
std::string security_label(const HeParams& params);

}  // namespace fhefl
