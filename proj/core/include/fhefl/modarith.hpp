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
#include <vector>

namespace fhefl {

using u64 = std::uint64_t;
using u128 = unsigned __int128;
using i128 = __int128;

/// A word-size prime modulus (< 2^62) with a precomputed Barrett constant.
class Modulus {
 public:
  Modulus() = default;
  explicit Modulus(u64 value);

  u64 value() const noexcept { return value_; }
  int bit_count() const noexcept { return bit_count_; }

  u64 add(u64 a, u64 b) const noexcept {
    u64 s = a + b;
    return s >= value_ ? s - value_ : s;
  }
  u64 sub(u64 a, u64 b) const noexcept { return a >= b ? a - b : a + value_ - b; }
  u64 neg(u64 a) const noexcept { return a == 0 ? 0 : value_ - a; }

  /// Barrett reduction of a product below 2^124.
  u64 reduce(u128 x) const noexcept {
    const u64 x0 = static_cast<u64>(x);
    const u64 x1 = static_cast<u64>(x >> 64);
    const u128 lo = static_cast<u128>(x0) * ratio_lo_;
    const u128 mid = static_cast<u128>(x1) * ratio_lo_ + static_cast<u128>(x0) * ratio_hi_ + (lo >> 64);
    const u128 qhat = static_cast<u128>(x1) * ratio_hi_ + (mid >> 64);
    u128 r = x - qhat * value_;
    while (r >= value_) r -= value_;
    return static_cast<u64>(r);
  }

  u64 mul(u64 a, u64 b) const noexcept { return reduce(static_cast<u128>(a) * b); }

  /// Reduces a signed 128-bit integer into [0, q).
  u64 reduce_signed(i128 x) const noexcept {
    const i128 q = static_cast<i128>(value_);
    i128 r = x % q;
    if (r < 0) r += q;
    return static_cast<u64>(r);
  }

  u64 pow(u64 base, u64 exponent) const noexcept;
  u64 inverse(u64 a) const;

  /// Shoup precomputation floor(w * 2^64 / q) for a fixed multiplicand w < q.
  u64 shoup(u64 w) const noexcept {
    return static_cast<u64>((static_cast<u128>(w) << 64) / value_);
  }
  u64 mul_shoup(u64 a, u64 w, u64 w_shoup) const noexcept {
    const u64 hi = static_cast<u64>((static_cast<u128>(a) * w_shoup) >> 64);
    u64 r = a * w - hi * value_;
    return r >= value_ ? r - value_ : r;
  }

  /// Maps a residue to its centered representative in (-q/2, q/2].
  std::int64_t center(u64 a) const noexcept {
    return a > value_ / 2 ? static_cast<std::int64_t>(a) - static_cast<std::int64_t>(value_)
                          : static_cast<std::int64_t>(a);
  }

  friend bool operator==(const Modulus& a, const Modulus& b) { return a.value_ == b.value_; }

 private:
  u64 value_ = 0;
  int bit_count_ = 0;
  u64 ratio_lo_ = 0;
  u64 ratio_hi_ = 0;
};

/// Deterministic Miller-Rabin, exact for every 64-bit input.
bool is_prime(u64 n);

/// Returns `count` distinct primes of exactly `bits` bits with p = 1 (mod 2n),
/// searching downward from 2^bits and skipping anything in `exclude`.
std::vector<u64> find_ntt_primes(int bits, std::size_t count, std::size_t n,
                                 const std::vector<u64>& exclude = {});

/// Smallest primitive 2n-th root of unity modulo a prime p = 1 (mod 2n).
u64 primitive_2n_root(const Modulus& modulus, std::size_t n);

}  // namespace fhefl
