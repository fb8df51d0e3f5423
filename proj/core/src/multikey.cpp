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

#include "fhefl/multikey.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <string>

#include "fhefl/error.hpp"

namespace fhefl {

namespace {

Seed pair_seed(const Seed& master, std::uint64_t a, std::uint64_t b) {
  return derive_seed(master, "pair", {std::min(a, b), std::max(a, b)});
}

RingElement signed_pair_element(const Seed& seed, std::string_view label, std::uint64_t tag,
                                const HeParams& params, std::size_t level, bool negate) {
  RingElement r = sample_uniform(derive_seed(seed, label, {tag}), params.ring, level, false);
  return negate ? ring_neg(r) : r;
}

void check_roster(std::span<const std::uint64_t> roster, std::span<const std::uint64_t> present,
                  const char* what) {
  std::set<std::uint64_t> expected(roster.begin(), roster.end());
  require(expected.size() == roster.size(), ErrorCode::kInvalidArgument,
          std::string(what) + ": roster contains duplicates");
  std::set<std::uint64_t> seen;
  for (std::uint64_t id : present) {
    require(expected.contains(id), ErrorCode::kInvalidArgument,
            std::string(what) + ": user " + std::to_string(id) + " is not on the roster");
    require(seen.insert(id).second, ErrorCode::kDuplicateMessage,
            std::string(what) + ": duplicate message from user " + std::to_string(id));
  }
  if (seen.size() != expected.size()) {
    std::string missing;
    for (std::uint64_t id : expected) {
      if (!seen.contains(id)) missing += (missing.empty() ? "" : ",") + std::to_string(id);
    }
    fail(ErrorCode::kIncompleteRoster, std::string(what) + ": missing users " + missing);
  }
}

}  // namespace

std::vector<UserKeyring> setup_pairwise(const HeParams& params, std::span<const std::uint64_t> user_ids,
                                        const Seed& master_seed, std::uint64_t epoch) {
  require(user_ids.size() >= 2, ErrorCode::kInvalidArgument,
          "pairwise setup needs at least two users");
  std::set<std::uint64_t> unique(user_ids.begin(), user_ids.end());
  require(unique.size() == user_ids.size(), ErrorCode::kInvalidArgument, "duplicate user id");

  std::vector<UserKeyring> keyrings;
  keyrings.reserve(user_ids.size());
  for (std::uint64_t u : user_ids) {
    UserKeyring k;
    k.user_id = u;
    k.params = params;
    k.user_seed = derive_seed(master_seed, "user", {u});
    for (std::uint64_t j : user_ids) {
      if (j != u) k.pair_seeds.emplace(j, pair_seed(master_seed, u, j));
    }
    refresh_epoch(k, epoch);
    keyrings.push_back(std::move(k));
  }
  return keyrings;
}

void refresh_epoch(UserKeyring& keyring, std::uint64_t epoch) {
  keyring.epoch = epoch;
  Prng prng(derive_seed(keyring.user_seed, "secret", {epoch}));
  keyring.secret = generate_secret_key(keyring.params, prng);
  keyring.eval_key = generate_eval_key(keyring.params, keyring.secret, prng);
  keyring.pairwise.clear();
  for (const auto& [peer, seed] : keyring.pair_seeds) {
    keyring.pairwise.emplace(peer, signed_pair_element(seed, "pairwise-secret", epoch, keyring.params,
                                                       keyring.params.max_level(),
                                                       keyring.user_id > peer));
  }
}

MaskedKey mask_key(const UserKeyring& keyring, std::uint64_t epoch) {
  require(keyring.epoch == epoch, ErrorCode::kInvalidArgument,
          "keyring of user " + std::to_string(keyring.user_id) + " is at epoch " +
              std::to_string(keyring.epoch) + ", not " + std::to_string(epoch));
  RingElement ss = restrict_to(keyring.secret.s, keyring.params.max_level(), false);
  for (const auto& [peer, secret] : keyring.pairwise) ss = ring_add(ss, secret);
  return MaskedKey{keyring.user_id, epoch, std::move(ss)};
}

RingElement reconstruct_group_key(std::span<const MaskedKey> masked_keys,
                                  std::span<const std::uint64_t> roster) {
  require(!masked_keys.empty(), ErrorCode::kIncompleteRoster, "no masked keys received");
  std::vector<std::uint64_t> ids;
  for (const auto& mk : masked_keys) {
    require(mk.epoch == masked_keys.front().epoch, ErrorCode::kInvalidArgument,
            "masked keys from different epochs");
    ids.push_back(mk.user_id);
  }
  check_roster(roster, ids, "reconstruct_group_key");
  RingElement sum = masked_keys.front().value;
  for (std::size_t i = 1; i < masked_keys.size(); ++i) sum = ring_add(sum, masked_keys[i].value);
  return sum;
}

PlainVector aggregate_fresh(std::span<const Ciphertext> cts, const RingElement& group_key) {
  require(!cts.empty(), ErrorCode::kInvalidArgument, "aggregate_fresh: no ciphertexts");
  Ciphertext sum = cts.front();
  for (std::size_t i = 1; i < cts.size(); ++i) {
    require(cts[i].c1 == cts.front().c1, ErrorCode::kMismatchedCommonPoly,
            "aggregate_fresh: ciphertext " + std::to_string(i) + " does not share c1 = a");
    require(!cts[i].c2, ErrorCode::kInvalidArgument, "aggregate_fresh expects fresh ciphertexts");
    sum.c0 = ring_add(sum.c0, cts[i].c0);
    require(cts[i].level == sum.level && std::fabs(cts[i].scale / sum.scale - 1.0) < 1e-9,
            ErrorCode::kScaleMismatch, "aggregate_fresh: level or scale differs");
    sum.noise_bound += cts[i].noise_bound;
    sum.value_bound += cts[i].value_bound;
  }
  // sum c0 - a * sum ss_u: c1 stays the single common a.
  return decrypt_with(sum, group_key);
}

RingElement pairwise_mask(const UserKeyring& keyring, std::uint64_t peer, std::uint64_t round,
                          std::size_t level) {
  const auto it = keyring.pair_seeds.find(peer);
  require(it != keyring.pair_seeds.end(), ErrorCode::kInvalidArgument,
          "user " + std::to_string(keyring.user_id) + " shares no seed with " + std::to_string(peer));
  RingElement mask = signed_pair_element(it->second, "decryption-mask", round, keyring.params, level,
                                         keyring.user_id > peer);
  return mask;
}

PartialDecryption masked_partial_decrypt(const UserKeyring& keyring, const RingElement& c1,
                                         std::uint64_t round, double flood_sigma) {
  require(c1.domain() == Domain::kNtt && !c1.extended(), ErrorCode::kDomainMismatch,
          "partial decryption expects an NTT-domain c1");
  const std::size_t level = c1.level();
  Prng prng(derive_seed(keyring.user_seed, "flood", {keyring.epoch, round}));
  RingElement share = ntt_forward(sample_error(prng, keyring.params.ring, level, false, flood_sigma));
  ring_mul_accumulate(share, c1, restrict_to(keyring.secret.s, level, false));
  for (const auto& [peer, seed] : keyring.pair_seeds) {
    share = ring_add(share, pairwise_mask(keyring, peer, round, level));
  }
  return PartialDecryption{keyring.user_id, round, std::move(share)};
}

std::vector<double> combine_partials_coefficients(std::span<const Ciphertext> cts,
                                                  std::span<const PartialDecryption> partials,
                                                  std::span<const std::uint64_t> roster) {
  require(!cts.empty(), ErrorCode::kInvalidArgument, "combine_partials: no ciphertexts");
  require(cts.size() == roster.size(), ErrorCode::kIncompleteRoster,
          "combine_partials: expected one ciphertext per roster member");
  std::vector<std::uint64_t> ids;
  for (const auto& p : partials) {
    require(p.round == partials.front().round, ErrorCode::kInvalidArgument,
            "combine_partials: partials from different rounds");
    ids.push_back(p.user_id);
  }
  check_roster(roster, ids, "combine_partials");

  const Ciphertext& first = cts.front();
  RingElement acc = first.c0;
  for (std::size_t i = 1; i < cts.size(); ++i) {
    require(cts[i].level == first.level && std::fabs(cts[i].scale / first.scale - 1.0) < 1e-9,
            ErrorCode::kScaleMismatch, "combine_partials: ciphertext level or scale differs");
    require(!cts[i].c2, ErrorCode::kInvalidArgument, "combine_partials expects relinearized input");
    acc = ring_add(acc, cts[i].c0);
  }
  for (const auto& p : partials) {
    require(p.share.level() == first.level, ErrorCode::kLevelMismatch,
            "combine_partials: partial at the wrong level");
    acc = ring_sub(acc, p.share);
  }
  const auto coeffs = to_centered(acc);
  std::vector<double> out(coeffs.size());
  for (std::size_t j = 0; j < coeffs.size(); ++j) {
    out[j] = static_cast<double>(coeffs[j] / static_cast<long double>(first.scale));
  }
  return out;
}

PlainVector combine_partials(std::span<const Ciphertext> cts, std::span<const PartialDecryption> partials,
                             std::span<const std::uint64_t> roster) {
  const auto coeffs = combine_partials_coefficients(cts, partials, roster);
  const Ciphertext& first = cts.front();
  PlainVector out;
  out.layout = first.layout;
  out.span = first.span;
  const std::size_t length = first.layout == Layout::kRaw ? coeffs.size() : first.length;
  out.values.resize(length);
  for (std::size_t k = 0; k < length; ++k) out.values[k] = coeffs.at(out.position(k));
  return out;
}

std::vector<std::pair<std::uint64_t, std::uint64_t>> uncancelled_masks(
    std::span<const std::uint64_t> roster, std::span<const std::uint64_t> subset) {
  const std::set<std::uint64_t> inside(subset.begin(), subset.end());
  std::vector<std::pair<std::uint64_t, std::uint64_t>> out;
  for (std::uint64_t u : subset) {
    for (std::uint64_t j : roster) {
      if (j != u && !inside.contains(j)) out.emplace_back(u, j);
    }
  }
  return out;
}

}  // namespace fhefl
