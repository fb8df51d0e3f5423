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

#include <array>
#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <memory>
#include <string_view>
#include <vector>

namespace fhefl {

using Seed = std::array<std::uint8_t, 32>;

/// Builds a seed from a 64-bit integer (little-endian, zero padded).
Seed seed_from_u64(std::uint64_t value);

/// Domain-separated seed derivation: SHAKE256(parent || label || ids).
Seed derive_seed(const Seed& parent, std::string_view label,
                 std::initializer_list<std::uint64_t> ids = {});

/// Deterministic extendable-output generator: a ChaCha20 keystream keyed by a
/// 32-byte seed. Two generators built from the same seed emit the same stream.
class Prng {
 public:
  explicit Prng(const Seed& seed);
  ~Prng();
  Prng(Prng&&) noexcept;
  Prng& operator=(Prng&&) noexcept;
  Prng(const Prng&) = delete;
  Prng& operator=(const Prng&) = delete;

  std::uint64_t next_u64();

  /// Uniform integer in [0, bound) by rejection sampling.
  std::uint64_t uniform_below(std::uint64_t bound);

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform_unit();

  /// Standard normal deviate (Box-Muller).
  double normal();

 private:
  void refill();

  struct Cipher;
  std::unique_ptr<Cipher> cipher_;
  std::vector<std::uint8_t> buffer_;
  std::size_t offset_ = 0;
  bool has_spare_normal_ = false;
  double spare_normal_ = 0.0;
};

}  // namespace fhefl
