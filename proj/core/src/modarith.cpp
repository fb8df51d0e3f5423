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

#include "fhefl/modarith.hpp"

#include <algorithm>
#include <bit>

#include "fhefl/error.hpp"

namespace fhefl {

Modulus::Modulus(u64 value) : value_(value) {
  require(value >= 2 && value < (u64{1} << 62), ErrorCode::kInvalidArgument,
          "modulus must lie in [2, 2^62)");
  bit_count_ = std::bit_width(value);
  // floor((2^128 - 1) / q); equals floor(2^128 / q) for every odd q.
  const u128 ratio = ~static_cast<u128>(0) / value;
  ratio_lo_ = static_cast<u64>(ratio);
  ratio_hi_ = static_cast<u64>(ratio >> 64);
}

u64 Modulus::pow(u64 base, u64 exponent) const noexcept {
  u64 result = 1 % value_;
  base %= value_;
  while (exponent != 0) {
    if (exponent & 1) result = mul(result, base);
    base = mul(base, base);
    exponent >>= 1;
  }
  return result;
}

u64 Modulus::inverse(u64 a) const {
  a %= value_;
  require(a != 0, ErrorCode::kInvalidArgument, "zero has no modular inverse");
  // Extended Euclid on signed 128-bit to avoid overflow.
  i128 t = 0, new_t = 1;
  i128 r = value_, new_r = a;
  while (new_r != 0) {
    const i128 quotient = r / new_r;
    t -= quotient * new_t;
    std::swap(t, new_t);
    r -= quotient * new_r;
    std::swap(r, new_r);
  }
  require(r == 1, ErrorCode::kInvalidArgument, "value is not invertible");
  if (t < 0) t += value_;
  return static_cast<u64>(t);
}

namespace {

u64 mulmod_plain(u64 a, u64 b, u64 m) { return static_cast<u64>(static_cast<u128>(a) * b % m); }

u64 powmod_plain(u64 base, u64 e, u64 m) {
  u64 result = 1 % m;
  base %= m;
  while (e != 0) {
    if (e & 1) result = mulmod_plain(result, base, m);
    base = mulmod_plain(base, base, m);
    e >>= 1;
  }
  return result;
}

}  // namespace

bool is_prime(u64 n) {
  if (n < 2) return false;
  for (u64 p : {2ULL, 3ULL, 5ULL, 7ULL, 11ULL, 13ULL, 17ULL, 19ULL, 23ULL, 29ULL, 31ULL, 37ULL}) {
    if (n % p == 0) return n == p;
  }
  u64 d = n - 1;
  int s = 0;
  while ((d & 1) == 0) {
    d >>= 1;
    ++s;
  }
  // These bases are a deterministic witness set for n < 3.3e24.
  for (u64 a : {2ULL, 3ULL, 5ULL, 7ULL, 11ULL, 13ULL, 17ULL, 19ULL, 23ULL, 29ULL, 31ULL, 37ULL}) {
    u64 x = powmod_plain(a, d, n);
    if (x == 1 || x == n - 1) continue;
    bool composite = true;
    for (int r = 1; r < s; ++r) {
      x = mulmod_plain(x, x, n);
      if (x == n - 1) {
        composite = false;
        break;
      }
    }
    if (composite) return false;
  }
  return true;
}

std::vector<u64> find_ntt_primes(int bits, std::size_t count, std::size_t n,
                                 const std::vector<u64>& exclude) {
  require(bits >= 10 && bits <= 61, ErrorCode::kInvalidArgument, "prime size must be 10..61 bits");
  require(n >= 2 && std::has_single_bit(n), ErrorCode::kInvalidArgument,
          "ring degree must be a power of two");
  const u64 step = 2 * static_cast<u64>(n);
  const u64 upper = u64{1} << bits;
  const u64 lower = u64{1} << (bits - 1);
  std::vector<u64> primes;
  // Largest candidate of the form k*2n + 1 below 2^bits.
  u64 candidate = ((upper - 1) / step) * step + 1;
  if (candidate >= upper) candidate -= step;
  while (primes.size() < count) {
    require(candidate > lower, ErrorCode::kInfeasible, "not enough NTT-friendly primes of requested size");
    if (is_prime(candidate) && std::find(exclude.begin(), exclude.end(), candidate) == exclude.end()) {
      primes.push_back(candidate);
    }
    candidate -= step;
  }
  return primes;
}

u64 primitive_2n_root(const Modulus& modulus, std::size_t n) {
  const u64 q = modulus.value();
  const u64 order = 2 * static_cast<u64>(n);
  require((q - 1) % order == 0, ErrorCode::kInvalidArgument, "prime is not 1 mod 2n");
  for (u64 x = 2; x < q; ++x) {
    const u64 root = modulus.pow(x, (q - 1) / order);
    // Order divides 2n (a power of two); it is exactly 2n iff root^n = -1.
    if (modulus.pow(root, n) == q - 1) return root;
  }
  fail(ErrorCode::kInfeasible, "no primitive 2n-th root found");
}

}  // namespace fhefl
