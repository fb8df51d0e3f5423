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
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "fhefl/he.hpp"
#include "fhefl/multikey.hpp"

namespace fhefl {

struct GradientUpdate {
  std::uint64_t user_id = 0;
  std::vector<double> values;
  double learning_rate = 0.0;
};

/// One gradient block under three packings. forward x reversed yields the
/// block's squared norm at coefficient width-1; a rate ciphertext times the
/// strided packing (stride 2*width-1) yields rate * g_k at (width-1) + k*stride.
struct EncryptedBlock {
  Ciphertext forward;
  Ciphertext reversed;
  Ciphertext strided;
};

struct EncryptedUpdate {
  std::uint64_t user_id = 0;
  std::uint64_t epoch = 0;
  std::size_t dimension = 0;
  /// Packing width shared by every block: min(dimension, block capacity).
  std::size_t width = 0;
  std::vector<EncryptedBlock> blocks;

  std::size_t norm_index() const { return width - 1; }
  std::size_t stride() const { return 2 * width - 1; }
};

double sq_norm_plain(std::span<const double> g);

/// Encrypts a gradient under the user's secret. Ciphertext i uses the common
/// polynomial common_poly(params, round_seed, epoch, i).
EncryptedUpdate encrypt_update(const GradientUpdate& update, const SecretKey& sk, const HeParams& params,
                               const Seed& round_seed, std::uint64_t epoch, Prng& prng);

/// [d_u] = sum over blocks of forward x reversed; the norm sits at coefficient width-1.
Ciphertext sq_norm_encrypted(const EncryptedUpdate& update, const EvalKey& evk);

/// p_u = (1 - d_u / sum d) / (U - 1). Exactly 1/U when all distances are equal.
std::vector<double> non_poisoning_rates(std::span<const double> distances);

/// [p_u] = (1 - [d_u] / sum_d) / (U - 1), the constant landing at `index`.
Ciphertext rates_encrypted(const Ciphertext& d_ct, double sum_d, std::size_t users, std::size_t index = 0);

/// w_prev - eta * sum_u p_u g_u.
std::vector<double> weighted_aggregate_plain(std::span<const double> w_prev,
                                             std::span<const GradientUpdate> updates,
                                             std::span<const double> rates, double eta);

struct SecureRoundOptions {
  double flood_sigma = kDefaultFloodSigma;
  /// Distinct per call; every masked decryption inside uses base + counter.
  std::uint64_t round_base = 0;
  /// Divide the decrypted aggregate by the decrypted sum of encrypted rates.
  bool renormalize = true;
};

struct SecureRoundResult {
  std::vector<double> model;
  /// sum_u p_u g_u as decrypted (after renormalization).
  std::vector<double> aggregate;
  double sum_distances = 0.0;
  double rate_sum = 0.0;
  bool uniform_fallback = false;
  /// Wall-clock per stage in milliseconds.
  std::map<std::string, double> stage_ms;
};

/// Encrypted non-poisoning-rate aggregation. Keyrings stand in for the users'
/// side of the two masked decryption rounds and must cover the same roster as
/// the updates.
SecureRoundResult secure_aggregate_round(std::span<const EncryptedUpdate> updates,
                                         std::span<const UserKeyring> keyrings,
                                         std::span<const double> w_prev, double eta,
                                         const SecureRoundOptions& options = {});

/// sum_u weights[u] * g_u.
std::vector<double> weighted_sum(std::span<const GradientUpdate> updates, std::span<const double> weights);

// Plain-domain baselines. Each returns an aggregated gradient.
std::vector<double> fedavg(std::span<const GradientUpdate> updates);
std::vector<double> coordinate_median(std::span<const GradientUpdate> updates);
/// Drops ceil(beta * U) values from each end of every coordinate.
std::vector<double> trimmed_mean(std::span<const GradientUpdate> updates, double beta);
/// Single Krum: the update minimising the summed squared distance to its U-f-2 nearest peers.
std::vector<double> krum(std::span<const GradientUpdate> updates, std::size_t f);

enum class Aggregator { kFheFL, kFedAvg, kMedian, kTrimmedMean, kKrum };

Aggregator parse_aggregator(std::string_view name);
std::string_view aggregator_name(Aggregator a);

}  // namespace fhefl
