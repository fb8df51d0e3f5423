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

#include "fhefl/params.hpp"

#include <cmath>
#include <map>
#include <memory>
#include <mutex>

#include "fhefl/error.hpp"

namespace fhefl {

namespace {

const std::vector<PresetSpec>& preset_specs() {
  static const std::vector<PresetSpec> specs = {
      {"test-16", 16, {60}, 40, 2, 60, 40},
      {"test-1024", 1024, {60}, 40, 4, 60, 40},
      {"fhefl-8192", 8192, {59}, 25, 4, 59, 25},
      {"fhefl-16384", 16384, {46, 46, 46}, 60, 4, 60, 60},
  };
  return specs;
}

}  // namespace

double HeParams::scale() const { return std::ldexp(1.0, scale_bits); }

std::size_t HeParams::block_capacity() const {
  const std::size_t n = degree();
  std::size_t w = 1;
  while ((w + 1) * (2 * (w + 1) - 1) <= n) ++w;
  return w;
}

double HeParams::max_encodable() const {
  return std::ldexp(1.0, ring->base_bits() - scale_bits - 1);
}

HeParams make_params(const PresetSpec& spec) {
  require(!spec.base_bits.empty(), ErrorCode::kInvalidArgument, "preset needs base primes");
  require(spec.levels >= 1, ErrorCode::kInvalidArgument, "preset needs at least one level");
  std::vector<u64> used;
  std::vector<u64> base;
  for (int bits : spec.base_bits) {
    const auto p = find_ntt_primes(bits, 1, spec.degree, used);
    base.push_back(p[0]);
    used.push_back(p[0]);
  }
  const auto scale_primes = find_ntt_primes(spec.scale_prime_bits, spec.levels, spec.degree, used);
  used.insert(used.end(), scale_primes.begin(), scale_primes.end());
  const u64 special = find_ntt_primes(spec.special_bits, 1, spec.degree, used)[0];

  std::vector<u64> chain = base;
  chain.insert(chain.end(), scale_primes.begin(), scale_primes.end());
  HeParams params;
  params.name = spec.name;
  params.ring = RingParams::create(spec.degree, chain, special, base.size());
  params.scale_bits = spec.scale_bits;

  // One multiplication at the lowest usable level must not wrap: Delta^2 < q_base * q_1.
  const int lowest_mult_bits = params.ring->base_bits() + params.ring->modulus(base.size()).bit_count();
  require(2 * spec.scale_bits < lowest_mult_bits, ErrorCode::kInvalidArgument,
          "scale leaves no headroom for one multiplication");
  return params;
}

const HeParams& preset(std::string_view name) {
  static std::mutex mutex;
  static std::map<std::string, std::unique_ptr<HeParams>, std::less<>> cache;
  std::lock_guard lock(mutex);
  if (auto it = cache.find(name); it != cache.end()) return *it->second;
  for (const auto& spec : preset_specs()) {
    if (spec.name == name) {
      auto params = std::make_unique<HeParams>(make_params(spec));
      const HeParams& ref = *params;
      cache.emplace(spec.name, std::move(params));
      return ref;
    }
  }
  fail(ErrorCode::kUnknownPreset, "unknown parameter preset '" + std::string(name) + "'");
}

std::vector<std::string> preset_names() {
  std::vector<std::string> names;
  for (const auto& spec : preset_specs()) names.push_back(spec.name);
  return names;
}

std::string security_label(const HeParams& params) {
  // Maximum log2(Q) for 128-bit classical security, ternary secret.
  static const std::map<std::size_t, int> kMaxBits128 = {
      {1024, 27}, {2048, 54}, {4096, 109}, {8192, 218}, {16384, 438}, {32768, 881}};
  const auto it = kMaxBits128.find(params.degree());
  if (it != kMaxBits128.end() && params.ring->total_bits() <= it->second) return "128-bit";
  return "insecure (testing only)";
}

}  // namespace fhefl
