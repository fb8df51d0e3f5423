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
#include <memory>
#include <span>
#include <vector>

#include "fhefl/modarith.hpp"
#include "fhefl/prng.hpp"

namespace fhefl {

/// Precomputed negacyclic NTT tables for one prime (powers of a primitive
/// 2N-th root in bit-reversed order, with Shoup companions).
struct NttTables {
  std::vector<u64> root_powers;
  std::vector<u64> root_powers_shoup;
  std::vector<u64> inv_root_powers;
  std::vector<u64> inv_root_powers_shoup;
  u64 inv_degree = 0;
  u64 inv_degree_shoup = 0;
};

/// Ring Z_Q[X]/(X^N + 1) in RNS form. The modulus chain q_0..q_{k-1} is split
/// into `base_count` base primes (never dropped) followed by one scale prime per
/// level. An optional special prime serves key switching only.
class RingParams {
 public:
  static std::shared_ptr<const RingParams> create(std::size_t degree, std::vector<u64> chain,
                                                  u64 special_prime = 0,
                                                  std::size_t base_count = 1);

  std::size_t degree() const noexcept { return degree_; }
  int log_degree() const noexcept { return log_degree_; }
  std::size_t chain_size() const noexcept { return chain_size_; }
  std::size_t base_count() const noexcept { return base_count_; }
  std::size_t max_level() const noexcept { return chain_size_ - base_count_; }
  bool has_special() const noexcept { return moduli_.size() > chain_size_; }
  std::size_t special_index() const noexcept { return chain_size_; }

  /// Number of chain primes active at `level`.
  std::size_t moduli_at(std::size_t level) const noexcept { return base_count_ + level; }

  /// Index < chain_size() addresses the chain; chain_size() addresses the special prime.
  const Modulus& modulus(std::size_t index) const { return moduli_.at(index); }
  const NttTables& ntt_tables(std::size_t index) const { return tables_.at(index); }

  std::vector<u64> chain_primes() const;
  u64 special_prime() const { return has_special() ? moduli_.back().value() : 0; }

  /// Sum of bit lengths of the base primes (log2 of q_0 in CKKS terms).
  int base_bits() const;
  /// Sum of bit lengths of every prime, special included.
  int total_bits() const;

 private:
  RingParams() = default;

  std::size_t degree_ = 0;
  int log_degree_ = 0;
  std::size_t chain_size_ = 0;
  std::size_t base_count_ = 1;
  std::vector<Modulus> moduli_;
  std::vector<NttTables> tables_;
};

using RingParamsPtr = std::shared_ptr<const RingParams>;

enum class Domain { kCoefficient, kNtt };

/// A polynomial held as one residue vector per active modulus.
class RingElement {
 public:
  RingElement() = default;
  /// Zero element with `level` active chain levels, optionally extended by the special prime.
  RingElement(RingParamsPtr params, std::size_t level, bool extended = false,
              Domain domain = Domain::kCoefficient);

  /// Builds a coefficient-domain element from signed integer coefficients.
  static RingElement from_signed(RingParamsPtr params, std::size_t level,
                                 std::span<const std::int64_t> coeffs, bool extended = false);

  const RingParamsPtr& params() const noexcept { return params_; }
  std::size_t level() const noexcept { return level_; }
  bool extended() const noexcept { return extended_; }
  Domain domain() const noexcept { return domain_; }
  std::size_t degree() const noexcept { return params_->degree(); }
  std::size_t num_moduli() const noexcept { return params_->moduli_at(level_) + (extended_ ? 1 : 0); }

  /// Maps the k-th active residue row to its index in RingParams.
  std::size_t modulus_index(std::size_t k) const noexcept {
    const std::size_t chain = params_->moduli_at(level_);
    return k < chain ? k : params_->special_index();
  }
  const Modulus& modulus(std::size_t k) const { return params_->modulus(modulus_index(k)); }

  std::span<u64> residues(std::size_t k) { return {data_.data() + k * degree(), degree()}; }
  std::span<const u64> residues(std::size_t k) const {
    return {data_.data() + k * degree(), degree()};
  }

  bool is_zero() const noexcept;
  void set_domain(Domain d) noexcept { domain_ = d; }

  friend bool operator==(const RingElement& a, const RingElement& b);

 private:
  RingParamsPtr params_;
  std::size_t level_ = 0;
  bool extended_ = false;
  Domain domain_ = Domain::kCoefficient;
  std::vector<u64> data_;
};

RingElement ntt_forward(RingElement elem);
RingElement ntt_inverse(RingElement elem);

/// Returns the element in the requested domain, transforming if needed.
RingElement to_domain(RingElement elem, Domain domain);

RingElement ring_add(const RingElement& a, const RingElement& b);
RingElement ring_sub(const RingElement& a, const RingElement& b);
RingElement ring_neg(const RingElement& a);
/// Negacyclic product. Both operands must share a domain; the result keeps it.
RingElement ring_mul(const RingElement& a, const RingElement& b);
/// Multiplies by a signed integer constant (reduced per modulus).
RingElement ring_mul_scalar(const RingElement& a, i128 scalar);

/// In-place accumulate a += b * c (all in NTT domain).
void ring_mul_accumulate(RingElement& acc, const RingElement& b, const RingElement& c);

RingElement sample_uniform(Prng& prng, RingParamsPtr params, std::size_t level, bool extended = false);
RingElement sample_uniform(const Seed& seed, RingParamsPtr params, std::size_t level,
                           bool extended = false);

inline constexpr double kErrorSigma = 3.2;

/// Centered rounded Gaussian coefficients, rejecting anything beyond 6 sigma.
std::vector<std::int64_t> sample_gaussian_coeffs(Prng& prng, std::size_t degree, double sigma);
/// Uniform ternary coefficients in {-1, 0, 1}.
std::vector<std::int64_t> sample_ternary_coeffs(Prng& prng, std::size_t degree);

RingElement sample_error(Prng& prng, RingParamsPtr params, std::size_t level, bool extended = false,
                         double sigma = kErrorSigma);
RingElement sample_secret(Prng& prng, RingParamsPtr params, std::size_t level, bool extended = false);

/// Rescale: removes the last active chain prime, dividing by it with rounding.
RingElement drop_level(const RingElement& elem);
/// Divides an extended element by the special prime with rounding and drops it.
RingElement mod_down_special(const RingElement& elem);
/// Keeps only the residues of `level` (and the special prime if `extended`).
/// Valid in either domain; the represented integer is unchanged modulo the kept primes.
RingElement restrict_to(const RingElement& elem, std::size_t level, bool extended = false);

/// Lifts row k of a coefficient-domain element, as integers in [0, q_k), into a
/// coefficient-domain element over the requested moduli.
RingElement lift_row(const RingElement& elem, std::size_t k, std::size_t level, bool extended);

/// Exact centered CRT reconstruction of every coefficient, returned as long double.
std::vector<long double> to_centered(const RingElement& elem);

}  // namespace fhefl
