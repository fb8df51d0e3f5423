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

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "fhefl/ring.hpp"

namespace fhefl {

using Bytes = std::vector<std::uint8_t>;

/// Little-endian append-only writer.
class ByteWriter {
 public:
  void magic(std::string_view four_chars);
  void u8(std::uint8_t v) { out_.push_back(v); }
  void u32(std::uint32_t v);
  void u64(std::uint64_t v);
  void f64(double v);
  void str(std::string_view s);
  void raw(std::span<const std::uint8_t> bytes) { out_.insert(out_.end(), bytes.begin(), bytes.end()); }

  const Bytes& bytes() const& { return out_; }
  Bytes bytes() && { return std::move(out_); }

 private:
  Bytes out_;
};

/// Bounds-checked little-endian reader; throws ErrorCode::kSerialization on truncation.
class ByteReader {
 public:
  explicit ByteReader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

  void expect_magic(std::string_view four_chars);
  std::uint8_t u8();
  std::uint32_t u32();
  std::uint64_t u64();
  double f64();
  std::string str();
  std::span<const std::uint8_t> raw(std::size_t count);

  bool done() const noexcept { return pos_ == bytes_.size(); }
  std::size_t position() const noexcept { return pos_; }

 private:
  void need(std::size_t count) const;

  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
};

inline constexpr std::uint32_t kFormatVersion = 1;

/// "FHRP" | version | N | base count | chain length | chain primes | special prime (0 = none)
void write_ring_params(ByteWriter& w, const RingParams& params);
RingParamsPtr read_ring_params(ByteReader& r);

/// "FHRE" | version | N | level | flags (bit0 NTT, bit1 extended) | prime count |
/// primes | residues, row-major, one little-endian u64 each.
void write_ring_element(ByteWriter& w, const RingElement& elem);
RingElement read_ring_element(ByteReader& r, const RingParamsPtr& params);

Bytes serialize(const RingElement& elem);
RingElement deserialize_ring_element(std::span<const std::uint8_t> bytes, const RingParamsPtr& params);

}  // namespace fhefl
