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

#include "fhefl/wire.hpp"

#include <string>

#include "fhefl/error.hpp"

namespace fhefl {

namespace {

void header(ByteWriter& w, std::string_view magic, const HeParams& params) {
  w.magic(magic);
  w.u32(kFormatVersion);
  w.str(params.name);
}

const HeParams& read_header(ByteReader& r, std::string_view magic) {
  r.expect_magic(magic);
  require(r.u32() == kFormatVersion, ErrorCode::kSerialization,
          "unsupported " + std::string(magic) + " version");
  return preset(r.str());
}

void finish(const ByteReader& r, std::string_view what) {
  require(r.done(), ErrorCode::kSerialization, "trailing bytes after " + std::string(what));
}

}  // namespace

Bytes serialize(const UpdateMessage& m, const HeParams& params) {
  ByteWriter w;
  header(w, "FHWU", params);
  w.u64(m.epoch);
  w.u64(m.user_id);
  w.u64(m.update.user_id);
  w.u64(m.update.epoch);
  w.u64(m.update.dimension);
  w.u64(m.update.width);
  w.u32(static_cast<std::uint32_t>(m.update.blocks.size()));
  for (const auto& b : m.update.blocks) {
    write_ciphertext(w, b.forward, params);
    write_ciphertext(w, b.reversed, params);
    write_ciphertext(w, b.strided, params);
  }
  w.u64(m.masked_key.user_id);
  w.u64(m.masked_key.epoch);
  write_ring_element(w, m.masked_key.value);
  return std::move(w).bytes();
}

UpdateMessage deserialize_update_message(std::span<const std::uint8_t> bytes) {
  ByteReader r(bytes);
  const HeParams& params = read_header(r, "FHWU");
  UpdateMessage m;
  m.epoch = r.u64();
  m.user_id = r.u64();
  m.update.user_id = r.u64();
  m.update.epoch = r.u64();
  m.update.dimension = r.u64();
  m.update.width = r.u64();
  const std::uint32_t blocks = r.u32();
  for (std::uint32_t i = 0; i < blocks; ++i) {
    EncryptedBlock b;
    b.forward = read_ciphertext(r);
    b.reversed = read_ciphertext(r);
    b.strided = read_ciphertext(r);
    m.update.blocks.push_back(std::move(b));
  }
  m.masked_key.user_id = r.u64();
  m.masked_key.epoch = r.u64();
  m.masked_key.value = read_ring_element(r, params.ring);
  finish(r, "update message");
  require(m.update.user_id == m.user_id && m.masked_key.user_id == m.user_id, ErrorCode::kSerialization,
          "update message carries inconsistent user ids");
  return m;
}

Bytes serialize(const DecryptRequest& m, const HeParams& params) {
  ByteWriter w;
  header(w, "FHWQ", params);
  w.u64(m.epoch);
  w.u64(m.round);
  write_ring_element(w, m.c1);
  return std::move(w).bytes();
}

DecryptRequest deserialize_decrypt_request(std::span<const std::uint8_t> bytes) {
  ByteReader r(bytes);
  const HeParams& params = read_header(r, "FHWQ");
  DecryptRequest m;
  m.epoch = r.u64();
  m.round = r.u64();
  m.c1 = read_ring_element(r, params.ring);
  finish(r, "decrypt request");
  return m;
}

Bytes serialize(const DecryptResponse& m, const HeParams& params) {
  ByteWriter w;
  header(w, "FHWR", params);
  w.u64(m.epoch);
  w.u64(m.partial.user_id);
  w.u64(m.partial.round);
  write_ring_element(w, m.partial.share);
  return std::move(w).bytes();
}

DecryptResponse deserialize_decrypt_response(std::span<const std::uint8_t> bytes) {
  ByteReader r(bytes);
  const HeParams& params = read_header(r, "FHWR");
  DecryptResponse m;
  m.epoch = r.u64();
  m.partial.user_id = r.u64();
  m.partial.round = r.u64();
  m.partial.share = read_ring_element(r, params.ring);
  finish(r, "decrypt response");
  return m;
}

}  // namespace fhefl
