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
#include <span>

#include "fhefl/multikey.hpp"
#include "fhefl/robust_agg.hpp"

namespace fhefl {

/// User -> server: encrypted gradient plus masked key for the epoch.
struct UpdateMessage {
  std::uint64_t epoch = 0;
  std::uint64_t user_id = 0;
  EncryptedUpdate update;
  MaskedKey masked_key;
};

/// Server -> user: the c1 component the user must partially decrypt.
struct DecryptRequest {
  std::uint64_t epoch = 0;
  std::uint64_t round = 0;
  RingElement c1;
};

/// User -> server: masked partial decryption for one request.
struct DecryptResponse {
  std::uint64_t epoch = 0;
  PartialDecryption partial;
};

// Each message is "FHW?" | version | fields. Ring elements are bound to the
// named preset, which the reader looks up.
Bytes serialize(const UpdateMessage& m, const HeParams& params);
UpdateMessage deserialize_update_message(std::span<const std::uint8_t> bytes);

Bytes serialize(const DecryptRequest& m, const HeParams& params);
DecryptRequest deserialize_decrypt_request(std::span<const std::uint8_t> bytes);

Bytes serialize(const DecryptResponse& m, const HeParams& params);
DecryptResponse deserialize_decrypt_response(std::span<const std::uint8_t> bytes);

}  // namespace fhefl
