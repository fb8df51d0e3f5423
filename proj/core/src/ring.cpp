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

#include "fhefl/ring.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <string>

#include "fhefl/error.hpp"

namespace fhefl {

namespace {

std::size_t bit_reverse(std::size_t x, int bits) {
  std::size_t r = 0;
  for (int i = 0; i < bits; ++i) {
    r = (r << 1) | (x & 1);
    x >>= 1;
  }
  return r;
}

NttTables make_tables(const Modulus& q, std::size_t n, int log_n) {
  NttTables t;
  const u64 psi = primitive_2n_root(q, n);
  const u64 psi_inv = q.inverse(psi);
  t.root_powers.resize(n);
  t.inv_root_powers.resize(n);
  t.root_powers_shoup.resize(n);
  t.inv_root_powers_shoup.resize(n);
  u64 power = 1;
  u64 inv_power = 1;
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t r = bit_reverse(i, log_n);
    t.root_powers[r] = power;
    t.inv_root_powers[r] = inv_power;
    power = q.mul(power, psi);
    inv_power = q.mul(inv_power, psi_inv);
  }
  for (std::size_t i = 0; i < n; ++i) {
    t.root_powers_shoup[i] = q.shoup(t.root_powers[i]);
    t.inv_root_powers_shoup[i] = q.shoup(t.inv_root_powers[i]);
  }
  t.inv_degree = q.inverse(static_cast<u64>(n) % q.value());
  t.inv_degree_shoup = q.shoup(t.inv_degree);
  return t;
}

// Cooley-Tukey, natural order in, bit-reversed order out.
void forward_row(std::span<u64> a, const NttTables& t, const Modulus& q) {
  const std::size_t n = a.size();
  std::size_t span = n;
  for (std::size_t m = 1; m < n; m <<= 1) {
    span >>= 1;
    for (std::size_t i = 0; i < m; ++i) {
      const std::size_t j1 = 2 * i * span;
      const u64 w = t.root_powers[m + i];
      const u64 w_shoup = t.root_powers_shoup[m + i];
      for (std::size_t j = j1; j < j1 + span; ++j) {
        const u64 u = a[j];
        const u64 v = q.mul_shoup(a[j + span], w, w_shoup);
        a[j] = q.add(u, v);
        a[j + span] = q.sub(u, v);
      }
    }
  }
}

// Gentleman-Sande, bit-reversed order in, natural order out.
void inverse_row(std::span<u64> a, const NttTables& t, const Modulus& q) {
  const std::size_t n = a.size();
  std::size_t span = 1;
  for (std::size_t m = n; m > 1; m >>= 1) {
    const std::size_t half = m >> 1;
    std::size_t j1 = 0;
    for (std::size_t i = 0; i < half; ++i) {
      const u64 w = t.inv_root_powers[half + i];
      const u64 w_shoup = t.inv_root_powers_shoup[half + i];
      for (std::size_t j = j1; j < j1 + span; ++j) {
        const u64 u = a[j];
        const u64 v = a[j + span];
        a[j] = q.add(u, v);
        a[j + span] = q.mul_shoup(q.sub(u, v), w, w_shoup);
      }
      j1 += 2 * span;
    }
    span <<= 1;
  }
  for (auto& x : a) x = q.mul_shoup(x, t.inv_degree, t.inv_degree_shoup);
}

bool same_params(const RingParamsPtr& a, const RingParamsPtr& b) {
  if (a == b) return true;
  if (!a || !b) return false;
  return a->degree() == b->degree() && a->base_count() == b->base_count() &&
         a->chain_primes() == b->chain_primes() && a->special_prime() == b->special_prime();
}

void check_compatible(const RingElement& a, const RingElement& b, const char* op) {
  require(same_params(a.params(), b.params()), ErrorCode::kInvalidArgument,
          std::string(op) + ": operands use different ring parameters");
  require(a.level() == b.level() && a.extended() == b.extended(), ErrorCode::kLevelMismatch,
          std::string(op) + ": operands are at different levels (" + std::to_string(a.level()) +
              " vs " + std::to_string(b.level()) + ")");
  require(a.domain() == b.domain(), ErrorCode::kDomainMismatch,
          std::string(op) + ": operands are in different domains");
}

RingElement divide_round_by_last(const RingElement& elem, std::size_t new_level, bool new_extended) {
  const std::size_t k = elem.num_moduli();
  const std::size_t n = elem.degree();
  const Modulus& last_q = elem.modulus(k - 1);
  std::vector<u64> last(elem.residues(k - 1).begin(), elem.residues(k - 1).end());
  if (elem.domain() == Domain::kNtt) {
    inverse_row(last, elem.params()->ntt_tables(elem.modulus_index(k - 1)), last_q);
  }
  std::vector<std::int64_t> centered(n);
  for (std::size_t j = 0; j < n; ++j) centered[j] = last_q.center(last[j]);

  RingElement out(elem.params(), new_level, new_extended, elem.domain());
  require(out.num_moduli() == k - 1, ErrorCode::kInvalidArgument, "inconsistent modulus drop");
  std::vector<u64> correction(n);
  for (std::size_t i = 0; i + 1 < k; ++i) {
    const Modulus& q = elem.modulus(i);
    for (std::size_t j = 0; j < n; ++j) correction[j] = q.reduce_signed(centered[j]);
    if (elem.domain() == Domain::kNtt) {
      forward_row(correction, elem.params()->ntt_tables(elem.modulus_index(i)), q);
    }
    const u64 inv = q.inverse(last_q.value() % q.value());
    const u64 inv_shoup = q.shoup(inv);
    auto src = elem.residues(i);
    auto dst = out.residues(i);
    for (std::size_t j = 0; j < n; ++j) {
      dst[j] = q.mul_shoup(q.sub(src[j], correction[j]), inv, inv_shoup);
    }
  }
  return out;
}

}  // namespace

// ---------------------------------------------------------------------------
// RingParams

std::shared_ptr<const RingParams> RingParams::create(std::size_t degree, std::vector<u64> chain,
                                                     u64 special_prime, std::size_t base_count) {
  require(degree >= 2 && std::has_single_bit(degree), ErrorCode::kInvalidArgument,
          "ring degree must be a power of two >= 2");
  require(!chain.empty(), ErrorCode::kInvalidArgument, "modulus chain is empty");
  require(base_count >= 1 && base_count <= chain.size(), ErrorCode::kInvalidArgument,
          "base prime count must be within the chain");
  std::vector<u64> all = chain;
  if (special_prime != 0) all.push_back(special_prime);
  for (std::size_t i = 0; i < all.size(); ++i) {
    require(is_prime(all[i]), ErrorCode::kInvalidArgument,
            "modulus " + std::to_string(all[i]) + " is not prime");
    require((all[i] - 1) % (2 * degree) == 0, ErrorCode::kInvalidArgument,
            "modulus " + std::to_string(all[i]) + " is not 1 mod 2N");
    for (std::size_t j = 0; j < i; ++j) {
      require(all[i] != all[j], ErrorCode::kInvalidArgument, "moduli must be distinct");
    }
  }

  auto params = std::shared_ptr<RingParams>(new RingParams());
  params->degree_ = degree;
  params->log_degree_ = std::countr_zero(degree);
  params->chain_size_ = chain.size();
  params->base_count_ = base_count;
  for (u64 p : all) {
    params->moduli_.emplace_back(p);
    params->tables_.push_back(make_tables(params->moduli_.back(), degree, params->log_degree_));
  }
  return params;
}

std::vector<u64> RingParams::chain_primes() const {
  std::vector<u64> out;
  for (std::size_t i = 0; i < chain_size_; ++i) out.push_back(moduli_[i].value());
  return out;
}

int RingParams::base_bits() const {
  int bits = 0;
  for (std::size_t i = 0; i < base_count_; ++i) bits += moduli_[i].bit_count();
  return bits;
}

int RingParams::total_bits() const {
  int bits = 0;
  for (const auto& m : moduli_) bits += m.bit_count();
  return bits;
}

// ---------------------------------------------------------------------------
// RingElement

RingElement::RingElement(RingParamsPtr params, std::size_t level, bool extended, Domain domain)
    : params_(std::move(params)), level_(level), extended_(extended), domain_(domain) {
  require(params_ != nullptr, ErrorCode::kInvalidArgument, "ring parameters are null");
  require(level_ <= params_->max_level(), ErrorCode::kInvalidArgument,
          "level " + std::to_string(level_) + " exceeds the chain");
  require(!extended_ || params_->has_special(), ErrorCode::kInvalidArgument,
          "parameters have no special prime");
  data_.assign(num_moduli() * params_->degree(), 0);
}

RingElement RingElement::from_signed(RingParamsPtr params, std::size_t level,
                                     std::span<const std::int64_t> coeffs, bool extended) {
  RingElement out(std::move(params), level, extended);
  require(coeffs.size() <= out.degree(), ErrorCode::kInvalidArgument,
          "more coefficients than the ring degree");
  for (std::size_t k = 0; k < out.num_moduli(); ++k) {
    const Modulus& q = out.modulus(k);
    auto row = out.residues(k);
    for (std::size_t j = 0; j < coeffs.size(); ++j) row[j] = q.reduce_signed(coeffs[j]);
  }
  return out;
}

bool RingElement::is_zero() const noexcept {
  return std::all_of(data_.begin(), data_.end(), [](u64 v) { return v == 0; });
}

bool operator==(const RingElement& a, const RingElement& b) {
  return same_params(a.params_, b.params_) && a.level_ == b.level_ &&
         a.extended_ == b.extended_ && a.domain_ == b.domain_ && a.data_ == b.data_;
}

// ---------------------------------------------------------------------------
// Transforms and arithmetic

RingElement ntt_forward(RingElement elem) {
  require(elem.domain() == Domain::kCoefficient, ErrorCode::kDomainMismatch,
          "ntt_forward expects a coefficient-domain element");
  for (std::size_t k = 0; k < elem.num_moduli(); ++k) {
    forward_row(elem.residues(k), elem.params()->ntt_tables(elem.modulus_index(k)), elem.modulus(k));
  }
  elem.set_domain(Domain::kNtt);
  return elem;
}

RingElement ntt_inverse(RingElement elem) {
  require(elem.domain() == Domain::kNtt, ErrorCode::kDomainMismatch,
          "ntt_inverse expects an NTT-domain element");
  for (std::size_t k = 0; k < elem.num_moduli(); ++k) {
    inverse_row(elem.residues(k), elem.params()->ntt_tables(elem.modulus_index(k)), elem.modulus(k));
  }
  elem.set_domain(Domain::kCoefficient);
  return elem;
}

RingElement to_domain(RingElement elem, Domain domain) {
  if (elem.domain() == domain) return elem;
  return domain == Domain::kNtt ? ntt_forward(std::move(elem)) : ntt_inverse(std::move(elem));
}

RingElement ring_add(const RingElement& a, const RingElement& b) {
  check_compatible(a, b, "ring_add");
  RingElement out = a;
  for (std::size_t k = 0; k < a.num_moduli(); ++k) {
    const Modulus& q = a.modulus(k);
    auto dst = out.residues(k);
    auto src = b.residues(k);
    for (std::size_t j = 0; j < dst.size(); ++j) dst[j] = q.add(dst[j], src[j]);
  }
  return out;
}

RingElement ring_sub(const RingElement& a, const RingElement& b) {
  check_compatible(a, b, "ring_sub");
  RingElement out = a;
  for (std::size_t k = 0; k < a.num_moduli(); ++k) {
    const Modulus& q = a.modulus(k);
    auto dst = out.residues(k);
    auto src = b.residues(k);
    for (std::size_t j = 0; j < dst.size(); ++j) dst[j] = q.sub(dst[j], src[j]);
  }
  return out;
}

RingElement ring_neg(const RingElement& a) {
  RingElement out = a;
  for (std::size_t k = 0; k < a.num_moduli(); ++k) {
    const Modulus& q = a.modulus(k);
    for (auto& x : out.residues(k)) x = q.neg(x);
  }
  return out;
}

RingElement ring_mul(const RingElement& a, const RingElement& b) {
  check_compatible(a, b, "ring_mul");
  if (a.domain() == Domain::kCoefficient) {
    return ntt_inverse(ring_mul(ntt_forward(a), ntt_forward(b)));
  }
  RingElement out = a;
  for (std::size_t k = 0; k < a.num_moduli(); ++k) {
    const Modulus& q = a.modulus(k);
    auto dst = out.residues(k);
    auto src = b.residues(k);
    for (std::size_t j = 0; j < dst.size(); ++j) dst[j] = q.mul(dst[j], src[j]);
  }
  return out;
}

void ring_mul_accumulate(RingElement& acc, const RingElement& b, const RingElement& c) {
  check_compatible(acc, b, "ring_mul_accumulate");
  check_compatible(b, c, "ring_mul_accumulate");
  require(acc.domain() == Domain::kNtt, ErrorCode::kDomainMismatch,
          "ring_mul_accumulate requires NTT-domain operands");
  for (std::size_t k = 0; k < acc.num_moduli(); ++k) {
    const Modulus& q = acc.modulus(k);
    auto dst = acc.residues(k);
    auto lhs = b.residues(k);
    auto rhs = c.residues(k);
    for (std::size_t j = 0; j < dst.size(); ++j) dst[j] = q.add(dst[j], q.mul(lhs[j], rhs[j]));
  }
}

RingElement ring_mul_scalar(const RingElement& a, i128 scalar) {
  RingElement out = a;
  for (std::size_t k = 0; k < a.num_moduli(); ++k) {
    const Modulus& q = a.modulus(k);
    const u64 s = q.reduce_signed(scalar);
    const u64 s_shoup = q.shoup(s);
    for (auto& x : out.residues(k)) x = q.mul_shoup(x, s, s_shoup);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Sampling

RingElement sample_uniform(Prng& prng, RingParamsPtr params, std::size_t level, bool extended) {
  RingElement out(std::move(params), level, extended, Domain::kNtt);
  for (std::size_t k = 0; k < out.num_moduli(); ++k) {
    const u64 q = out.modulus(k).value();
    for (auto& x : out.residues(k)) x = prng.uniform_below(q);
  }
  return out;
}

RingElement sample_uniform(const Seed& seed, RingParamsPtr params, std::size_t level, bool extended) {
  Prng prng(seed);
  return sample_uniform(prng, std::move(params), level, extended);
}

std::vector<std::int64_t> sample_gaussian_coeffs(Prng& prng, std::size_t degree, double sigma) {
  std::vector<std::int64_t> coeffs(degree);
  const double bound = 6.0 * sigma;
  for (auto& c : coeffs) {
    double x = 0.0;
    do {
      x = std::round(sigma * prng.normal());
    } while (std::abs(x) > bound);
    c = static_cast<std::int64_t>(x);
  }
  return coeffs;
}

std::vector<std::int64_t> sample_ternary_coeffs(Prng& prng, std::size_t degree) {
  std::vector<std::int64_t> coeffs(degree);
  for (auto& c : coeffs) c = static_cast<std::int64_t>(prng.uniform_below(3)) - 1;
  return coeffs;
}

RingElement sample_error(Prng& prng, RingParamsPtr params, std::size_t level, bool extended,
                         double sigma) {
  const std::size_t n = params->degree();
  const auto coeffs = sample_gaussian_coeffs(prng, n, sigma);
  return RingElement::from_signed(std::move(params), level, coeffs, extended);
}

RingElement sample_secret(Prng& prng, RingParamsPtr params, std::size_t level, bool extended) {
  const std::size_t n = params->degree();
  const auto coeffs = sample_ternary_coeffs(prng, n);
  return RingElement::from_signed(std::move(params), level, coeffs, extended);
}

// ---------------------------------------------------------------------------
// Modulus management

RingElement drop_level(const RingElement& elem) {
  require(!elem.extended(), ErrorCode::kInvalidArgument, "drop_level on an extended element");
  require(elem.level() >= 1, ErrorCode::kLevelExhausted, "drop_level: no level left to drop");
  return divide_round_by_last(elem, elem.level() - 1, false);
}

RingElement mod_down_special(const RingElement& elem) {
  require(elem.extended(), ErrorCode::kInvalidArgument,
          "mod_down_special expects an extended element");
  return divide_round_by_last(elem, elem.level(), false);
}

RingElement restrict_to(const RingElement& elem, std::size_t level, bool extended) {
  require(level <= elem.level(), ErrorCode::kLevelMismatch, "restrict_to cannot raise the level");
  require(!extended || elem.extended(), ErrorCode::kInvalidArgument,
          "restrict_to cannot add the special prime");
  RingElement out(elem.params(), level, extended, elem.domain());
  const std::size_t chain = elem.params()->moduli_at(level);
  for (std::size_t k = 0; k < chain; ++k) {
    std::copy_n(elem.residues(k).begin(), elem.degree(), out.residues(k).begin());
  }
  if (extended) {
    std::copy_n(elem.residues(elem.num_moduli() - 1).begin(), elem.degree(),
                out.residues(out.num_moduli() - 1).begin());
  }
  return out;
}

RingElement lift_row(const RingElement& elem, std::size_t k, std::size_t level, bool extended) {
  require(elem.domain() == Domain::kCoefficient, ErrorCode::kDomainMismatch,
          "lift_row expects a coefficient-domain element");
  RingElement out(elem.params(), level, extended);
  auto src = elem.residues(k);
  for (std::size_t t = 0; t < out.num_moduli(); ++t) {
    const u64 q = out.modulus(t).value();
    auto dst = out.residues(t);
    for (std::size_t j = 0; j < dst.size(); ++j) dst[j] = src[j] % q;
  }
  return out;
}

std::vector<long double> to_centered(const RingElement& input) {
  const RingElement elem = to_domain(input, Domain::kCoefficient);
  const std::size_t k = elem.num_moduli();
  const std::size_t n = elem.degree();

  // Balanced-digit Garner: x = sum v_i * P_i with P_i = q_0 * ... * q_{i-1} and
  // v_i in (-q_i/2, q_i/2], which is exactly the centered representative.
  std::vector<std::vector<u64>> prefix_mod(k, std::vector<u64>(k, 0));
  std::vector<u64> prefix_inv(k, 0);
  std::vector<long double> prefix(k, 1.0L);
  for (std::size_t i = 0; i < k; ++i) {
    const Modulus& qi = elem.modulus(i);
    u64 running = 1 % qi.value();
    for (std::size_t j = 0; j < i; ++j) {
      prefix_mod[i][j] = running;
      running = qi.mul(running, elem.modulus(j).value() % qi.value());
    }
    prefix_mod[i][i] = running;
    prefix_inv[i] = i == 0 ? 1 : qi.inverse(running);
    if (i > 0) prefix[i] = prefix[i - 1] * static_cast<long double>(elem.modulus(i - 1).value());
  }

  std::vector<long double> out(n);
  std::vector<std::int64_t> digits(k);
  for (std::size_t c = 0; c < n; ++c) {
    for (std::size_t i = 0; i < k; ++i) {
      const Modulus& qi = elem.modulus(i);
      u64 acc = 0;
      for (std::size_t j = 0; j < i; ++j) {
        acc = qi.add(acc, qi.mul(qi.reduce_signed(digits[j]), prefix_mod[i][j]));
      }
      const u64 t = qi.mul(qi.sub(elem.residues(i)[c], acc), prefix_inv[i]);
      digits[i] = qi.center(t);
    }
    long double value = 0.0L;
    for (std::size_t i = k; i-- > 0;) value += static_cast<long double>(digits[i]) * prefix[i];
    out[c] = value;
  }
  return out;
}

}  // namespace fhefl
