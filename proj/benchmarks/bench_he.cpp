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

#include <numeric>
#include <string>
#include <vector>

#include <benchmark/benchmark.h>

#include "fhefl/he.hpp"
#include "fhefl/multikey.hpp"
#include "fhefl/params.hpp"
#include "fhefl/robust_agg.hpp"

namespace {

using namespace fhefl;

const char* preset_for(const benchmark::State& state) {
  static const char* names[] = {"test-1024", "fhefl-8192", "fhefl-16384"};
  return names[state.range(0)];
}

void BM_NttRoundTrip(benchmark::State& state) {
  const HeParams& params = preset(preset_for(state));
  Prng prng(seed_from_u64(1));
  auto elem = to_domain(sample_uniform(prng, params.ring, params.max_level()), Domain::kCoefficient);
  for (auto _ : state) {
    elem = ntt_inverse(ntt_forward(std::move(elem)));
    benchmark::DoNotOptimize(elem);
  }
  state.SetLabel(preset_for(state));
}

void BM_Encrypt(benchmark::State& state) {
  const HeParams& params = preset(preset_for(state));
  Prng prng(seed_from_u64(2));
  const auto sk = generate_secret_key(params, prng);
  const auto a = common_poly(params, seed_from_u64(3), 0, 0);
  const PlainVector v{std::vector<double>(params.block_capacity(), 0.25)};
  for (auto _ : state) benchmark::DoNotOptimize(encrypt(v, sk, a, params.scale(), prng));
  state.SetLabel(preset_for(state));
}

void BM_MultRelin(benchmark::State& state) {
  const HeParams& params = preset(preset_for(state));
  Prng prng(seed_from_u64(4));
  const auto sk = generate_secret_key(params, prng);
  const auto evk = generate_eval_key(params, sk, prng);
  const PlainVector v{std::vector<double>(params.block_capacity(), 0.25)};
  const auto x = encrypt(v, sk, common_poly(params, seed_from_u64(5), 0, 0), params.scale(), prng);
  const auto y = encrypt(v, sk, common_poly(params, seed_from_u64(5), 0, 1), params.scale(), prng);
  for (auto _ : state) benchmark::DoNotOptimize(he_mult_relin(x, y, evk));
  state.SetLabel(preset_for(state));
}

void BM_SecureRound(benchmark::State& state) {
  const HeParams& params = preset(preset_for(state));
  const std::size_t users = static_cast<std::size_t>(state.range(1));
  std::vector<std::uint64_t> ids(users);
  std::iota(ids.begin(), ids.end(), std::uint64_t{0});
  const auto keys = setup_pairwise(params, ids, seed_from_u64(6));
  Prng prng(seed_from_u64(7));
  std::vector<EncryptedUpdate> updates;
  for (std::size_t u = 0; u < users; ++u) {
    GradientUpdate g{u, std::vector<double>(params.block_capacity()), 0.1};
    for (double& x : g.values) x = 0.01 * prng.normal();
    updates.push_back(encrypt_update(g, keys[u].secret, params, seed_from_u64(8), 0, prng));
  }
  const std::vector<double> w(params.block_capacity(), 0.0);
  SecureRoundOptions options;
  for (auto _ : state) {
    benchmark::DoNotOptimize(secure_aggregate_round(updates, keys, w, 1.0, options));
    options.round_base += 1 << 10;
  }
  state.SetLabel(std::string(preset_for(state)) + ", " + std::to_string(users) + " users");
}

}  // namespace

BENCHMARK(BM_NttRoundTrip)->DenseRange(0, 2)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_Encrypt)->DenseRange(0, 2)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_MultRelin)->DenseRange(0, 2)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_SecureRound)->Args({0, 10})->Args({2, 10})->Unit(benchmark::kMillisecond)->Iterations(3);
BENCHMARK_MAIN();
