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
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "fhefl/params.hpp"
#include "fhefl/prng.hpp"
#include "fhefl/ring.hpp"
#include "fhefl/serialize.hpp"

namespace fhefl {

/// Where value k of a vector sits in the coefficient vector.
///   forward:  coefficient k
///   reversed: coefficient (width - 1 - k), width defaults to the vector length
///   strided:  coefficient k * stride
///   raw:      every coefficient, as produced by ciphertext products
enum class Layout : std::uint8_t { kForward = 0, kReversed = 1, kStrided = 2, kRaw = 3 };

struct PlainVector {
  std::vector<double> values;
  Layout layout = Layout::kForward;
  /// Packing width for kReversed (0 means values.size()), stride for kStrided.
  std::size_t span = 0;

  std::size_t position(std::size_t k) const;
  /// One past the highest coefficient index the layout touches.
  std::size_t extent() const;
};

/// Fixed-point coefficient encoding: round(scale * v_k) placed per the layout.
/// Fails with kOverflow when |scale * v_k| would reach half the base modulus.
RingElement encode(const PlainVector& v, double scale, const RingParamsPtr& ring, std::size_t level);

/// Inverse of encode with signed centering.
PlainVector decode(const RingElement& elem, double scale, std::size_t length,
                   Layout layout = Layout::kForward, std::size_t span = 0);

struct SecretKey {
  /// Ternary secret, NTT domain, top level, extended by the special prime.
  RingElement s;
};

/// Relinearization key with one component per chain prime (RNS gadget):
/// parts[i] = (a_i * s + e_i + p * g_i * s^2, a_i), where g_i is 1 modulo q_i
/// and 0 modulo every other prime.
struct EvalKey {
  std::vector<std::pair<RingElement, RingElement>> parts;
};

SecretKey generate_secret_key(const HeParams& params, Prng& prng);
EvalKey generate_eval_key(const HeParams& params, const SecretKey& sk, Prng& prng);

struct Ciphertext {
  RingElement c0;
  RingElement c1;
  /// Present only for unrelinearized products: decrypts as c0 - c1 s + c2 s^2.
  std::optional<RingElement> c2;
  std::size_t level = 0;
  double scale = 1.0;
  Layout layout = Layout::kRaw;
  std::size_t length = 0;
  std::size_t span = 0;
  /// Heuristic upper bounds in plaintext units (divided by the scale).
  double noise_bound = 0.0;
  double value_bound = 0.0;

  std::size_t size() const { return c2 ? 3 : 2; }
  const RingParamsPtr& ring() const { return c0.params(); }
};

/// Common polynomial a for (round seed, epoch, ciphertext index); identical for all users.
RingElement common_poly(const HeParams& params, const Seed& round_seed, std::uint64_t epoch,
                        std::uint64_t index);

/// c0 = a*s + encode(v) + e, c1 = a, at the level of `common_a`.
Ciphertext encrypt(const PlainVector& v, const SecretKey& sk, const RingElement& common_a,
                   double scale, Prng& prng);

PlainVector decrypt(const Ciphertext& ct, const SecretKey& sk);
/// Decrypts with an arbitrary key element (e.g. a reconstructed group key).
PlainVector decrypt_with(const Ciphertext& ct, const RingElement& key);
/// All N decoded coefficients regardless of layout.
std::vector<double> decrypt_coefficients(const Ciphertext& ct, const RingElement& key);

Ciphertext he_add(const Ciphertext& a, const Ciphertext& b);
Ciphertext he_sub(const Ciphertext& a, const Ciphertext& b);
/// Tensor product (c0c0', c0c1' + c0'c1, c1c1') without relinearization or rescale.
Ciphertext he_mult_raw(const Ciphertext& a, const Ciphertext& b);
Ciphertext relinearize(const Ciphertext& ct, const EvalKey& evk);
/// Divides by the last active prime; scale shrinks by the same factor.
Ciphertext rescale(const Ciphertext& ct);
/// he_mult_raw, relinearize, rescale.
Ciphertext he_mult_relin(const Ciphertext& a, const Ciphertext& b, const EvalKey& evk);

/// Computes mult * v + add. The scalar is encoded against the top active prime
/// and rescaled away, so the scale is preserved and one level is consumed.
/// `add` lands at coefficient `index`.
Ciphertext plain_affine(const Ciphertext& ct, double mult, double add, std::size_t index = 0);

/// Drops primes above `level` without dividing (value and scale unchanged).
Ciphertext match_level(const Ciphertext& ct, std::size_t level);

/// Decode shape of a ciphertext, e.g. to reinterpret a product's coefficients.
Ciphertext with_layout(Ciphertext ct, Layout layout, std::size_t length, std::size_t span = 0);

// Binary layouts. Header: magic, version, preset name, level, log2(scale).
Bytes serialize(const Ciphertext& ct, const HeParams& params);
Ciphertext deserialize_ciphertext(std::span<const std::uint8_t> bytes);
void write_ciphertext(ByteWriter& w, const Ciphertext& ct, const HeParams& params);
Ciphertext read_ciphertext(ByteReader& r);

Bytes serialize(const SecretKey& sk, const HeParams& params);
SecretKey deserialize_secret_key(std::span<const std::uint8_t> bytes);
Bytes serialize(const EvalKey& evk, const HeParams& params);
EvalKey deserialize_eval_key(std::span<const std::uint8_t> bytes);

}  // namespace fhefl
