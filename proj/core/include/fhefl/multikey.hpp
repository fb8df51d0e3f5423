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

#include <cstdint>
#include <map>
#include <span>
#include <utility>
#include <vector>

#include "fhefl/he.hpp"

namespace fhefl {

/// Smudging noise for partial decryptions: 2^20 times the encryption sigma.
inline constexpr double kDefaultFloodSigma = 1048576.0 * kErrorSigma;

/// One user's private key material for an epoch.
///
/// Pairwise secrets satisfy s_{u,j} = -s_{j,u}; both ends derive them from a
/// seed shared out of band, so no key agreement runs here.
struct UserKeyring {
  std::uint64_t user_id = 0;
  std::uint64_t epoch = 0;
  HeParams params;
  Seed user_seed{};
  SecretKey secret;
  EvalKey eval_key;
  std::map<std::uint64_t, Seed> pair_seeds;
  std::map<std::uint64_t, RingElement> pairwise;
};

struct MaskedKey {
  std::uint64_t user_id = 0;
  std::uint64_t epoch = 0;
  /// ss_u = s_u + sum_{j != u} s_{u,j}, top chain level, NTT domain.
  RingElement value;
};

struct PartialDecryption {
  std::uint64_t user_id = 0;
  std::uint64_t round = 0;
  /// c1_u * s_u + flood noise + sum_{j != u} r_{u,j}(round).
  RingElement share;
};

/// Derives keyrings for every user of a roster. Needs at least two users.
std::vector<UserKeyring> setup_pairwise(const HeParams& params, std::span<const std::uint64_t> user_ids,
                                        const Seed& master_seed, std::uint64_t epoch = 0);

/// Regenerates s_u, evk_u and the pairwise secrets for a new epoch.
void refresh_epoch(UserKeyring& keyring, std::uint64_t epoch);

MaskedKey mask_key(const UserKeyring& keyring, std::uint64_t epoch);

/// Sum of the masked keys of a complete roster; equals sum_u s_u exactly.
RingElement reconstruct_group_key(std::span<const MaskedKey> masked_keys,
                                  std::span<const std::uint64_t> roster);

/// Single-shot decryption of fresh ciphertexts that all carry the same c1 = a:
/// sum c0 - a * group_key.
PlainVector aggregate_fresh(std::span<const Ciphertext> cts, const RingElement& group_key);

/// r_{u,peer}(round) at `level`; antisymmetric in (u, peer).
RingElement pairwise_mask(const UserKeyring& keyring, std::uint64_t peer, std::uint64_t round,
                          std::size_t level);

PartialDecryption masked_partial_decrypt(const UserKeyring& keyring, const RingElement& c1,
                                         std::uint64_t round, double flood_sigma = kDefaultFloodSigma);

/// sum_u c0_u - sum_u ps_u, decoded with the shape of the first ciphertext.
/// Needs exactly one partial per roster member, all for the same round.
PlainVector combine_partials(std::span<const Ciphertext> cts, std::span<const PartialDecryption> partials,
                             std::span<const std::uint64_t> roster);
/// As combine_partials, returning every decoded coefficient.
std::vector<double> combine_partials_coefficients(std::span<const Ciphertext> cts,
                                                  std::span<const PartialDecryption> partials,
                                                  std::span<const std::uint64_t> roster);

/// Pairs (u, j) whose mask r_{u,j} stays uncancelled when only the partials of
/// `subset` are summed. Non-empty for every strict, non-empty subset.
std::vector<std::pair<std::uint64_t, std::uint64_t>> uncancelled_masks(
    std::span<const std::uint64_t> roster, std::span<const std::uint64_t> subset);

}  // namespace fhefl
