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

#include "fhefl/serialize.hpp"

#include <bit>
#include <cstring>

#include "fhefl/error.hpp"

namespace fhefl {

void ByteWriter::magic(std::string_view four_chars) {
  require(four_chars.size() == 4, ErrorCode::kInvalidArgument, "magic must be four bytes");
  out_.insert(out_.end(), four_chars.begin(), four_chars.end());
}

void ByteWriter::u32(std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

void ByteWriter::u64(std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

void ByteWriter::f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }

void ByteWriter::str(std::string_view s) {
  u32(static_cast<std::uint32_t>(s.size()));
  out_.insert(out_.end(), s.begin(), s.end());
}

void ByteReader::need(std::size_t count) const {
  if (bytes_.size() - pos_ < count) {
    fail(ErrorCode::kSerialization, "truncated input at byte " + std::to_string(pos_));
  }
}

void ByteReader::expect_magic(std::string_view four_chars) {
  need(4);
  if (std::memcmp(bytes_.data() + pos_, four_chars.data(), 4) != 0) {
    fail(ErrorCode::kSerialization, "bad magic, expected '" + std::string(four_chars) + "'");
  }
  pos_ += 4;
}

std::uint8_t ByteReader::u8() {
  need(1);
  return bytes_[pos_++];
}

std::uint32_t ByteReader::u32() {
  need(4);
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(bytes_[pos_ + i]) << (8 * i);
  pos_ += 4;
  return v;
}

std::uint64_t ByteReader::u64() {
  need(8);
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(bytes_[pos_ + i]) << (8 * i);
  pos_ += 8;
  return v;
}

double ByteReader::f64() { return std::bit_cast<double>(u64()); }

std::string ByteReader::str() {
  const std::uint32_t size = u32();
  need(size);
  std::string s(reinterpret_cast<const char*>(bytes_.data() + pos_), size);
  pos_ += size;
  return s;
}

std::span<const std::uint8_t> ByteReader::raw(std::size_t count) {
  need(count);
  auto out = bytes_.subspan(pos_, count);
  pos_ += count;
  return out;
}

void write_ring_params(ByteWriter& w, const RingParams& params) {
  w.magic("FHRP");
  w.u32(kFormatVersion);
  w.u64(params.degree());
  w.u32(static_cast<std::uint32_t>(params.base_count()));
  const auto chain = params.chain_primes();
  w.u32(static_cast<std::uint32_t>(chain.size()));
  for (u64 p : chain) w.u64(p);
  w.u64(params.special_prime());
}

RingParamsPtr read_ring_params(ByteReader& r) {
  r.expect_magic("FHRP");
  require(r.u32() == kFormatVersion, ErrorCode::kSerialization, "unsupported ring params version");
  const std::uint64_t degree = r.u64();
  const std::uint32_t base = r.u32();
  const std::uint32_t count = r.u32();
  require(count <= 64, ErrorCode::kSerialization, "implausible chain length");
  std::vector<u64> chain(count);
  for (auto& p : chain) p = r.u64();
  const u64 special = r.u64();
  return RingParams::create(degree, std::move(chain), special, base);
}

void write_ring_element(ByteWriter& w, const RingElement& elem) {
  w.magic("FHRE");
  w.u32(kFormatVersion);
  w.u64(elem.degree());
  w.u32(static_cast<std::uint32_t>(elem.level()));
  w.u8(static_cast<std::uint8_t>((elem.domain() == Domain::kNtt ? 1 : 0) | (elem.extended() ? 2 : 0)));
  w.u32(static_cast<std::uint32_t>(elem.num_moduli()));
  for (std::size_t k = 0; k < elem.num_moduli(); ++k) w.u64(elem.modulus(k).value());
  for (std::size_t k = 0; k < elem.num_moduli(); ++k) {
    for (u64 v : elem.residues(k)) w.u64(v);
  }
}

RingElement read_ring_element(ByteReader& r, const RingParamsPtr& params) {
  r.expect_magic("FHRE");
  require(r.u32() == kFormatVersion, ErrorCode::kSerialization, "unsupported ring element version");
  require(r.u64() == params->degree(), ErrorCode::kSerialization, "ring degree mismatch");
  const std::uint32_t level = r.u32();
  const std::uint8_t flags = r.u8();
  require(level <= params->max_level() && (flags & ~3u) == 0, ErrorCode::kSerialization,
          "invalid ring element header");
  RingElement elem(params, level, (flags & 2) != 0, (flags & 1) ? Domain::kNtt : Domain::kCoefficient);
  require(r.u32() == elem.num_moduli(), ErrorCode::kSerialization, "modulus count mismatch");
  for (std::size_t k = 0; k < elem.num_moduli(); ++k) {
    require(r.u64() == elem.modulus(k).value(), ErrorCode::kSerialization, "prime list mismatch");
  }
  for (std::size_t k = 0; k < elem.num_moduli(); ++k) {
    const u64 q = elem.modulus(k).value();
    for (auto& v : elem.residues(k)) {
      v = r.u64();
      require(v < q, ErrorCode::kSerialization, "residue out of range");
    }
  }
  return elem;
}

Bytes serialize(const RingElement& elem) {
  ByteWriter w;
  write_ring_element(w, elem);
  return std::move(w).bytes();
}

RingElement deserialize_ring_element(std::span<const std::uint8_t> bytes, const RingParamsPtr& params) {
  ByteReader r(bytes);
  RingElement elem = read_ring_element(r, params);
  require(r.done(), ErrorCode::kSerialization, "trailing bytes after ring element");
  return elem;
}

}  // namespace fhefl
