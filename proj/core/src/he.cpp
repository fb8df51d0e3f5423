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

#include "fhefl/he.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <string>

#include "fhefl/error.hpp"

namespace fhefl {

namespace {

i128 round_to_int(long double x, ErrorCode code, const char* what) {
  const long double r = std::round(x);
  require(std::isfinite(static_cast<double>(r)) && std::fabs(r) < 0x1.0p120L, code,
          std::string(what) + ": value too large to encode");
  return static_cast<i128>(r);
}

RingElement key_at(const RingElement& key, std::size_t level) {
  return restrict_to(to_domain(key, Domain::kNtt), level, false);
}

void check_noise_budget(const Ciphertext& ct) {
  // A value plus noise reaching Q/2 wraps around; decryption would be garbage.
  [[maybe_unused]] const double needed =
      std::log2(std::max(ct.value_bound + ct.noise_bound, 1e-300) * ct.scale);
  assert(needed < log2_modulus(*ct.ring(), ct.level) - 1.0 && "ciphertext noise budget exhausted");
}

double rescale_noise(const RingParams& ring, double new_scale) {
  // Rounding the division leaves |r0 + r1 s| <= (1 + N)/2 per coefficient.
  return (1.0 + static_cast<double>(ring.degree())) / 2.0 / new_scale;
}

}  // namespace

// ---------------------------------------------------------------------------
// Encoding

std::size_t PlainVector::position(std::size_t k) const {
  switch (layout) {
    case Layout::kForward:
    case Layout::kRaw:
      return k;
    case Layout::kReversed: {
      const std::size_t width = span == 0 ? values.size() : span;
      return width - 1 - k;
    }
    case Layout::kStrided:
      return k * span;
  }
  return k;
}

std::size_t PlainVector::extent() const {
  if (values.empty()) return 0;
  switch (layout) {
    case Layout::kReversed:
      return span == 0 ? values.size() : span;
    case Layout::kStrided:
      return (values.size() - 1) * span + 1;
    default:
      return values.size();
  }
}

RingElement encode(const PlainVector& v, double scale, const RingParamsPtr& ring, std::size_t level) {
  const std::size_t n = ring->degree();
  require(v.values.size() <= n / 2, ErrorCode::kInvalidArgument,
          "vector of length " + std::to_string(v.values.size()) + " exceeds slot capacity " +
              std::to_string(n / 2));
  require(v.layout != Layout::kStrided || v.span >= 1, ErrorCode::kInvalidArgument,
          "strided layout needs a positive stride");
  require(v.layout != Layout::kReversed || v.span == 0 || v.span >= v.values.size(),
          ErrorCode::kInvalidArgument, "reversed packing width shorter than the vector");
  require(v.extent() <= n, ErrorCode::kInvalidArgument, "layout runs past the ring degree");

  const long double limit = std::ldexp(1.0L, ring->base_bits() - 1);
  RingElement out(ring, level);
  for (std::size_t k = 0; k < v.values.size(); ++k) {
    const long double scaled = static_cast<long double>(v.values[k]) * scale;
    require(std::isfinite(v.values[k]) && std::fabs(scaled) < limit, ErrorCode::kOverflow,
            "value " + std::to_string(v.values[k]) + " overflows the encoding bound");
    const i128 coeff = static_cast<i128>(std::round(scaled));
    const std::size_t pos = v.position(k);
    for (std::size_t t = 0; t < out.num_moduli(); ++t) {
      out.residues(t)[pos] = out.modulus(t).reduce_signed(coeff);
    }
  }
  return out;
}

PlainVector decode(const RingElement& elem, double scale, std::size_t length, Layout layout,
                   std::size_t span) {
  const auto coeffs = to_centered(elem);
  PlainVector out;
  out.layout = layout;
  out.span = span;
  if (layout == Layout::kRaw) length = coeffs.size();
  out.values.resize(length);
  for (std::size_t k = 0; k < length; ++k) {
    const std::size_t pos = out.position(k);
    require(pos < coeffs.size(), ErrorCode::kInvalidArgument, "decode layout runs past the ring degree");
    out.values[k] = static_cast<double>(coeffs[pos] / static_cast<long double>(scale));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Keys

SecretKey generate_secret_key(const HeParams& params, Prng& prng) {
  return SecretKey{ntt_forward(sample_secret(prng, params.ring, params.max_level(), true))};
}

EvalKey generate_eval_key(const HeParams& params, const SecretKey& sk, Prng& prng) {
  const auto& ring = params.ring;
  const std::size_t top = params.max_level();
  const RingElement s_squared = ring_mul(sk.s, sk.s);
  const u64 special = ring->special_prime();

  EvalKey evk;
  for (std::size_t i = 0; i < ring->chain_size(); ++i) {
    RingElement a = sample_uniform(prng, ring, top, true);
    RingElement b = ntt_forward(sample_error(prng, ring, top, true));
    ring_mul_accumulate(b, a, sk.s);
    // p * g_i * s^2 lives only in row i.
    const Modulus& qi = b.modulus(i);
    const u64 p_mod = special % qi.value();
    auto dst = b.residues(i);
    auto src = s_squared.residues(i);
    for (std::size_t j = 0; j < dst.size(); ++j) dst[j] = qi.add(dst[j], qi.mul(src[j], p_mod));
    evk.parts.emplace_back(std::move(b), std::move(a));
  }
  return evk;
}

// ---------------------------------------------------------------------------
// Encryption

RingElement common_poly(const HeParams& params, const Seed& round_seed, std::uint64_t epoch,
                        std::uint64_t index) {
  return sample_uniform(derive_seed(round_seed, "common-a", {epoch, index}), params.ring,
                        params.max_level(), false);
}

Ciphertext encrypt(const PlainVector& v, const SecretKey& sk, const RingElement& common_a,
                   double scale, Prng& prng) {
  const auto& ring = common_a.params();
  const std::size_t level = common_a.level();
  require(common_a.domain() == Domain::kNtt && !common_a.extended(), ErrorCode::kDomainMismatch,
          "common polynomial must be an NTT-domain chain element");
  RingElement c0 = ntt_forward(ring_add(encode(v, scale, ring, level), sample_error(prng, ring, level)));
  ring_mul_accumulate(c0, common_a, key_at(sk.s, level));

  Ciphertext ct;
  ct.c0 = std::move(c0);
  ct.c1 = common_a;
  ct.level = level;
  ct.scale = scale;
  ct.layout = v.layout;
  ct.length = v.values.size();
  ct.span = v.span;
  ct.noise_bound = 6.0 * kErrorSigma / scale;
  for (double x : v.values) ct.value_bound = std::max(ct.value_bound, std::fabs(x));
  return ct;
}

std::vector<double> decrypt_coefficients(const Ciphertext& ct, const RingElement& key) {
  check_noise_budget(ct);
  const RingElement s = key_at(key, ct.level);
  RingElement m = ring_sub(ct.c0, ring_mul(ct.c1, s));
  if (ct.c2) m = ring_add(m, ring_mul(*ct.c2, ring_mul(s, s)));
  const auto coeffs = to_centered(m);
  std::vector<double> out(coeffs.size());
  for (std::size_t j = 0; j < coeffs.size(); ++j) {
    out[j] = static_cast<double>(coeffs[j] / static_cast<long double>(ct.scale));
  }
  return out;
}

PlainVector decrypt_with(const Ciphertext& ct, const RingElement& key) {
  const auto coeffs = decrypt_coefficients(ct, key);
  PlainVector out;
  out.layout = ct.layout;
  out.span = ct.span;
  const std::size_t length = ct.layout == Layout::kRaw ? coeffs.size() : ct.length;
  out.values.resize(length);
  for (std::size_t k = 0; k < length; ++k) out.values[k] = coeffs.at(out.position(k));
  return out;
}

PlainVector decrypt(const Ciphertext& ct, const SecretKey& sk) { return decrypt_with(ct, sk.s); }

// ---------------------------------------------------------------------------
// Evaluation

namespace {

void check_same_level(const Ciphertext& a, const Ciphertext& b, const char* op) {
  require(a.level == b.level, ErrorCode::kLevelMismatch,
          std::string(op) + ": ciphertexts at levels " + std::to_string(a.level) + " and " +
              std::to_string(b.level));
}

void check_same_scale(const Ciphertext& a, const Ciphertext& b, const char* op) {
  require(std::fabs(a.scale / b.scale - 1.0) < 1e-9, ErrorCode::kScaleMismatch,
          std::string(op) + ": ciphertext scales differ (2^" + std::to_string(std::log2(a.scale)) +
              " vs 2^" + std::to_string(std::log2(b.scale)) + ")");
}

void merge_shape(Ciphertext& out, const Ciphertext& a, const Ciphertext& b) {
  if (a.layout == b.layout && a.length == b.length && a.span == b.span) return;
  out.layout = Layout::kRaw;
  out.length = a.c0.degree();
  out.span = 0;
}

Ciphertext add_or_sub(const Ciphertext& a, const Ciphertext& b, bool subtract) {
  const char* op = subtract ? "he_sub" : "he_add";
  check_same_level(a, b, op);
  check_same_scale(a, b, op);
  auto combine = [subtract](const RingElement& x, const RingElement& y) {
    return subtract ? ring_sub(x, y) : ring_add(x, y);
  };
  Ciphertext out = a;
  out.c0 = combine(a.c0, b.c0);
  out.c1 = combine(a.c1, b.c1);
  if (a.c2 || b.c2) {
    const RingElement zero(a.ring(), a.level, false, Domain::kNtt);
    out.c2 = combine(a.c2 ? *a.c2 : zero, b.c2 ? *b.c2 : zero);
  }
  out.noise_bound = a.noise_bound + b.noise_bound;
  out.value_bound = a.value_bound + b.value_bound;
  merge_shape(out, a, b);
  return out;
}

}  // namespace

Ciphertext he_add(const Ciphertext& a, const Ciphertext& b) { return add_or_sub(a, b, false); }
Ciphertext he_sub(const Ciphertext& a, const Ciphertext& b) { return add_or_sub(a, b, true); }

Ciphertext he_mult_raw(const Ciphertext& a, const Ciphertext& b) {
  check_same_level(a, b, "he_mult");
  require(!a.c2 && !b.c2, ErrorCode::kInvalidArgument, "he_mult expects two-component ciphertexts");
  Ciphertext out;
  out.c0 = ring_mul(a.c0, b.c0);
  out.c1 = ring_mul(a.c0, b.c1);
  ring_mul_accumulate(out.c1, b.c0, a.c1);
  out.c2 = ring_mul(a.c1, b.c1);
  out.level = a.level;
  out.scale = a.scale * b.scale;
  out.layout = Layout::kRaw;
  out.length = a.c0.degree();
  const double n = static_cast<double>(a.c0.degree());
  out.value_bound = n * a.value_bound * b.value_bound;
  out.noise_bound = n * (a.value_bound * b.noise_bound + b.value_bound * a.noise_bound +
                         a.noise_bound * b.noise_bound);
  return out;
}

Ciphertext relinearize(const Ciphertext& ct, const EvalKey& evk) {
  require(ct.c2.has_value(), ErrorCode::kInvalidArgument, "relinearize expects three components");
  const auto& ring = ct.ring();
  const std::size_t level = ct.level;
  const std::size_t digits = ring->moduli_at(level);
  require(evk.parts.size() == ring->chain_size(), ErrorCode::kInvalidArgument,
          "evaluation key does not match the modulus chain");

  const RingElement d2 = ntt_inverse(*ct.c2);
  RingElement acc0(ring, level, true, Domain::kNtt);
  RingElement acc1(ring, level, true, Domain::kNtt);
  for (std::size_t i = 0; i < digits; ++i) {
    const RingElement digit = ntt_forward(lift_row(d2, i, level, true));
    ring_mul_accumulate(acc0, digit, restrict_to(evk.parts[i].first, level, true));
    ring_mul_accumulate(acc1, digit, restrict_to(evk.parts[i].second, level, true));
  }

  Ciphertext out = ct;
  out.c2.reset();
  out.c0 = ring_add(ct.c0, mod_down_special(acc0));
  out.c1 = ring_add(ct.c1, mod_down_special(acc1));
  // sum_i digit_i e_i / p with digit_i < q_i, plus the mod-down rounding.
  double key_switch = 0.0;
  for (std::size_t i = 0; i < digits; ++i) {
    key_switch += static_cast<double>(ring->modulus(i).value()) * 6.0 * kErrorSigma;
  }
  key_switch = key_switch * static_cast<double>(ring->degree()) /
                   static_cast<double>(ring->special_prime()) +
               static_cast<double>(ring->degree());
  out.noise_bound += key_switch / ct.scale;
  return out;
}

Ciphertext rescale(const Ciphertext& ct) {
  require(ct.level >= 1, ErrorCode::kLevelExhausted, "rescale: ciphertext is at level 0");
  const double dropped = static_cast<double>(ct.ring()->modulus(ct.ring()->moduli_at(ct.level) - 1).value());
  Ciphertext out = ct;
  out.c0 = drop_level(ct.c0);
  out.c1 = drop_level(ct.c1);
  if (ct.c2) out.c2 = drop_level(*ct.c2);
  out.level = ct.level - 1;
  out.scale = ct.scale / dropped;
  out.noise_bound = ct.noise_bound + rescale_noise(*ct.ring(), out.scale);
  return out;
}

Ciphertext he_mult_relin(const Ciphertext& a, const Ciphertext& b, const EvalKey& evk) {
  require(a.level >= 1 && b.level >= 1, ErrorCode::kLevelExhausted,
          "he_mult_relin: no level left for the rescale");
  return rescale(relinearize(he_mult_raw(a, b), evk));
}

Ciphertext plain_affine(const Ciphertext& ct, double mult, double add, std::size_t index) {
  require(!ct.c2, ErrorCode::kInvalidArgument, "plain_affine expects a relinearized ciphertext");
  require(ct.level >= 1, ErrorCode::kLevelExhausted, "plain_affine: no level left for the rescale");
  require(std::isfinite(mult) && std::isfinite(add), ErrorCode::kOverflow, "non-finite affine scalar");
  const auto& ring = ct.ring();
  require(index < ring->degree(), ErrorCode::kInvalidArgument, "affine offset index out of range");

  const long double top = static_cast<long double>(ring->modulus(ring->moduli_at(ct.level) - 1).value());
  const i128 factor = round_to_int(static_cast<long double>(mult) * top, ErrorCode::kOverflow,
                                   "plain_affine multiplier");
  Ciphertext scaled = ct;
  scaled.c0 = ring_mul_scalar(ct.c0, factor);
  scaled.c1 = ring_mul_scalar(ct.c1, factor);
  Ciphertext out = rescale(scaled);
  out.scale = ct.scale;

  if (add != 0.0) {
    const long double offset = std::round(static_cast<long double>(add) * out.scale);
    require(std::fabs(offset) < std::ldexp(1.0L, ring->base_bits() - 1), ErrorCode::kOverflow,
            "plain_affine offset overflows the encoding bound");
    RingElement constant(ring, out.level);
    for (std::size_t t = 0; t < constant.num_moduli(); ++t) {
      constant.residues(t)[index] = constant.modulus(t).reduce_signed(static_cast<i128>(offset));
    }
    out.c0 = ring_add(out.c0, ntt_forward(std::move(constant)));
  }
  out.value_bound = std::fabs(mult) * ct.value_bound + std::fabs(add);
  out.noise_bound = std::fabs(mult) * ct.noise_bound + ct.value_bound / static_cast<double>(top) +
                    rescale_noise(*ring, out.scale);
  return out;
}

Ciphertext match_level(const Ciphertext& ct, std::size_t level) {
  require(level <= ct.level, ErrorCode::kLevelMismatch, "match_level cannot raise a ciphertext");
  if (level == ct.level) return ct;
  Ciphertext out = ct;
  out.c0 = restrict_to(ct.c0, level);
  out.c1 = restrict_to(ct.c1, level);
  if (ct.c2) out.c2 = restrict_to(*ct.c2, level);
  out.level = level;
  return out;
}

Ciphertext with_layout(Ciphertext ct, Layout layout, std::size_t length, std::size_t span) {
  ct.layout = layout;
  ct.length = length;
  ct.span = span;
  return ct;
}

// ---------------------------------------------------------------------------
// Serialization

void write_ciphertext(ByteWriter& w, const Ciphertext& ct, const HeParams& params) {
  w.magic("FHCT");
  w.u32(kFormatVersion);
  w.str(params.name);
  w.u32(static_cast<std::uint32_t>(ct.level));
  w.f64(std::log2(ct.scale));
  w.u8(static_cast<std::uint8_t>(ct.layout));
  w.u64(ct.length);
  w.u64(ct.span);
  w.f64(ct.noise_bound);
  w.f64(ct.value_bound);
  w.u8(static_cast<std::uint8_t>(ct.size()));
  write_ring_element(w, ct.c0);
  write_ring_element(w, ct.c1);
  if (ct.c2) write_ring_element(w, *ct.c2);
}

Ciphertext read_ciphertext(ByteReader& r) {
  r.expect_magic("FHCT");
  require(r.u32() == kFormatVersion, ErrorCode::kSerialization, "unsupported ciphertext version");
  const HeParams& params = preset(r.str());
  Ciphertext ct;
  ct.level = r.u32();
  ct.scale = std::exp2(r.f64());
  const std::uint8_t layout = r.u8();
  require(layout <= static_cast<std::uint8_t>(Layout::kRaw), ErrorCode::kSerialization, "bad layout tag");
  ct.layout = static_cast<Layout>(layout);
  ct.length = r.u64();
  ct.span = r.u64();
  ct.noise_bound = r.f64();
  ct.value_bound = r.f64();
  const std::uint8_t components = r.u8();
  require(components == 2 || components == 3, ErrorCode::kSerialization, "bad component count");
  ct.c0 = read_ring_element(r, params.ring);
  ct.c1 = read_ring_element(r, params.ring);
  if (components == 3) ct.c2 = read_ring_element(r, params.ring);
  require(ct.c0.level() == ct.level && ct.c1.level() == ct.level, ErrorCode::kSerialization,
          "component level disagrees with header");
  return ct;
}

Bytes serialize(const Ciphertext& ct, const HeParams& params) {
  ByteWriter w;
  write_ciphertext(w, ct, params);
  return std::move(w).bytes();
}

Ciphertext deserialize_ciphertext(std::span<const std::uint8_t> bytes) {
  ByteReader r(bytes);
  Ciphertext ct = read_ciphertext(r);
  require(r.done(), ErrorCode::kSerialization, "trailing bytes after ciphertext");
  return ct;
}

Bytes serialize(const SecretKey& sk, const HeParams& params) {
  ByteWriter w;
  w.magic("FHSK");
  w.u32(kFormatVersion);
  w.str(params.name);
  write_ring_element(w, sk.s);
  return std::move(w).bytes();
}

SecretKey deserialize_secret_key(std::span<const std::uint8_t> bytes) {
  ByteReader r(bytes);
  r.expect_magic("FHSK");
  require(r.u32() == kFormatVersion, ErrorCode::kSerialization, "unsupported secret key version");
  const HeParams& params = preset(r.str());
  SecretKey sk{read_ring_element(r, params.ring)};
  require(r.done(), ErrorCode::kSerialization, "trailing bytes after secret key");
  return sk;
}

Bytes serialize(const EvalKey& evk, const HeParams& params) {
  ByteWriter w;
  w.magic("FHEK");
  w.u32(kFormatVersion);
  w.str(params.name);
  w.u32(static_cast<std::uint32_t>(evk.parts.size()));
  for (const auto& [b, a] : evk.parts) {
    write_ring_element(w, b);
    write_ring_element(w, a);
  }
  return std::move(w).bytes();
}

EvalKey deserialize_eval_key(std::span<const std::uint8_t> bytes) {
  ByteReader r(bytes);
  r.expect_magic("FHEK");
  require(r.u32() == kFormatVersion, ErrorCode::kSerialization, "unsupported eval key version");
  const HeParams& params = preset(r.str());
  const std::uint32_t count = r.u32();
  require(count == params.ring->chain_size(), ErrorCode::kSerialization, "eval key size mismatch");
  EvalKey evk;
  for (std::uint32_t i = 0; i < count; ++i) {
    RingElement b = read_ring_element(r, params.ring);
    RingElement a = read_ring_element(r, params.ring);
    evk.parts.emplace_back(std::move(b), std::move(a));
  }
  require(r.done(), ErrorCode::kSerialization, "trailing bytes after eval key");
  return evk;
}

}  // namespace fhefl
